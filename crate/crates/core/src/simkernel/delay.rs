use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};

/// Largest support enumerated exactly.
pub const MAX_ENUMERATED_SUPPORT: usize = 1_000_000;

/// Family of delay laws on `{0..n-1}^K`, one per blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySystem {
    /// Independent uniform delays.
    TotallyAsync { senders: usize },
    /// Two senders, independent uniform even delays.
    EvenDelays,
    /// Three senders, `D1 = D2` uniform and `D3` independent uniform.
    PartlyAsync3,
    Fixed { delays: Vec<usize> },
    /// Independent uniform delays on `{phase + stride * k} ∩ [0, n)`.
    Lattice { stride: Vec<usize>, phase: Vec<usize> },
    /// Explicit pmf; validated against `n` when used.
    Custom { senders: usize, pmf: Vec<(Vec<usize>, f64)> },
}

impl DelaySystem {
    pub fn num_senders(&self) -> usize {
        match self {
            DelaySystem::TotallyAsync { senders } | DelaySystem::Custom { senders, .. } => *senders,
            DelaySystem::EvenDelays => 2,
            DelaySystem::PartlyAsync3 => 3,
            DelaySystem::Fixed { delays } => delays.len(),
            DelaySystem::Lattice { stride, .. } => stride.len(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DelaySystem::TotallyAsync { senders } => format!("totally_async[{senders}]"),
            DelaySystem::EvenDelays => "even_delays".into(),
            DelaySystem::PartlyAsync3 => "partly_async3".into(),
            DelaySystem::Fixed { delays } => format!("fixed{delays:?}"),
            DelaySystem::Lattice { stride, phase } => format!("lattice{stride:?}+{phase:?}"),
            DelaySystem::Custom { senders, pmf } => format!("custom[{senders}; {} points]", pmf.len()),
        }
    }

    /// Checks the system makes sense at blocklength `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(AmacError::InvalidParameter("blocklength must be positive".into()));
        }
        match self {
            DelaySystem::TotallyAsync { senders } if *senders == 0 => {
                Err(AmacError::InvalidParameter("delay system needs at least one sender".into()))
            }
            DelaySystem::Fixed { delays } => match delays.iter().find(|&&d| d >= n) {
                Some(d) => Err(AmacError::InvalidParameter(format!("delay {d} outside 0..{n}"))),
                None => Ok(()),
            },
            DelaySystem::Lattice { stride, phase } => {
                if stride.len() != phase.len() || stride.iter().any(|&s| s == 0) {
                    return Err(AmacError::InvalidParameter(
                        "lattice needs one positive stride and one phase per sender".into(),
                    ));
                }
                match phase.iter().find(|&&p| p >= n) {
                    Some(p) => Err(AmacError::InvalidParameter(format!("phase {p} outside 0..{n}"))),
                    None => Ok(()),
                }
            }
            DelaySystem::Custom { senders, pmf } => {
                let mut total = 0.0;
                for (d, p) in pmf {
                    if d.len() != *senders || d.iter().any(|&x| x >= n) {
                        return Err(AmacError::InvalidParameter(format!(
                            "custom delay point {d:?} outside {{0..{}}}^{senders}",
                            n - 1
                        )));
                    }
                    if !(*p >= 0.0) {
                        return Err(AmacError::InvalidDistribution(format!("negative mass {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(AmacError::InvalidDistribution(format!(
                        "custom delay pmf sums to {total}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Values each sender's delay ranges over, when senders are independent.
    fn axes(&self, n: usize) -> Option<Vec<Vec<usize>>> {
        let k = self.num_senders();
        match self {
            DelaySystem::TotallyAsync { .. } => Some(vec![(0..n).collect(); k]),
            DelaySystem::EvenDelays => Some(vec![(0..n).step_by(2).collect(); 2]),
            DelaySystem::Fixed { delays } => Some(delays.iter().map(|&d| vec![d]).collect()),
            DelaySystem::Lattice { stride, phase } => Some(
                stride
                    .iter()
                    .zip(phase)
                    .map(|(&s, &p)| (p..n).step_by(s).collect())
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Number of support points at blocklength `n`.
    pub fn support_size(&self, n: usize) -> u128 {
        match self {
            DelaySystem::PartlyAsync3 => (n as u128) * (n as u128),
            DelaySystem::Custom { pmf, .. } => pmf.iter().filter(|(_, p)| *p > 0.0).count() as u128,
            _ => self
                .axes(n)
                .expect("independent system")
                .iter()
                .map(|a| a.len() as u128)
                .product(),
        }
    }

    /// Support points with their probabilities.
    pub fn support(&self, n: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        self.validate(n)?;
        let size = self.support_size(n);
        if size > MAX_ENUMERATED_SUPPORT as u128 {
            return Err(AmacError::Capacity(format!(
                "delay support has {size} points, more than {MAX_ENUMERATED_SUPPORT}"
            )));
        }
        Ok(match self {
            DelaySystem::PartlyAsync3 => {
                let w = 1.0 / (n * n) as f64;
                (0..n)
                    .flat_map(|a| (0..n).map(move |c| (vec![a, a, c], w)))
                    .collect()
            }
            DelaySystem::Custom { pmf, .. } => pmf.iter().filter(|(_, p)| *p > 0.0).cloned().collect(),
            _ => {
                let axes = self.axes(n).expect("independent system");
                let w = 1.0 / size as f64;
                let mut out = vec![(Vec::new(), w)];
                for axis in &axes {
                    out = out
                        .into_iter()
                        .flat_map(|(d, w)| {
                            axis.iter().map(move |&v| {
                                let mut e = d.clone();
                                e.push(v);
                                (e, w)
                            })
                        })
                        .collect();
                }
                out
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.validate(n)?;
        Ok(match self {
            DelaySystem::PartlyAsync3 => {
                let a = rng.gen_range(0..n);
                vec![a, a, rng.gen_range(0..n)]
            }
            DelaySystem::Custom { pmf, .. } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = &pmf[pmf.len() - 1].0;
                for (d, p) in pmf {
                    acc += p;
                    if u < acc {
                        pick = d;
                        break;
                    }
                }
                pick.clone()
            }
            _ => self
                .axes(n)
                .expect("independent system")
                .iter()
                .map(|axis| axis[rng.gen_range(0..axis.len())])
                .collect(),
        })
    }

    /// Probability of the delay vector `d` at blocklength `n`.
    pub fn pmf(&self, n: usize, d: &[usize]) -> f64 {
        if d.len() != self.num_senders() || d.iter().any(|&x| x >= n) {
            return 0.0;
        }
        match self {
            DelaySystem::PartlyAsync3 => {
                if d[0] == d[1] {
                    1.0 / (n * n) as f64
                } else {
                    0.0
                }
            }
            DelaySystem::Custom { pmf, .. } => pmf
                .iter()
                .filter(|(e, _)| e.as_slice() == d)
                .map(|(_, p)| p)
                .sum(),
            _ => {
                let axes = self.axes(n).expect("independent system");
                axes.iter()
                    .zip(d)
                    .map(|(a, x)| if a.contains(x) { 1.0 / a.len() as f64 } else { 0.0 })
                    .product()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn support_and_samples() {
        let mut rng = stream(&[1]);
        let fixed = DelaySystem::Fixed { delays: vec![0, 0] };
        assert_eq!(fixed.sample(10, &mut rng).unwrap(), vec![0, 0]);

        let even = DelaySystem::EvenDelays;
        assert_eq!(even.support_size(10), 25);
        for _ in 0..200 {
            let d = even.sample(10, &mut rng).unwrap();
            assert!(d.iter().all(|x| x % 2 == 0 && *x < 10));
        }
        let pa = DelaySystem::PartlyAsync3;
        for _ in 0..200 {
            let d = pa.sample(7, &mut rng).unwrap();
            assert_eq!(d[0], d[1]);
        }
        let total: f64 = pa.support(5).unwrap().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((pa.pmf(5, &[1, 1, 3]) - 1.0 / 25.0).abs() < 1e-15);
        assert_eq!(pa.pmf(5, &[1, 2, 3]), 0.0);

        let bad = DelaySystem::Custom { senders: 1, pmf: vec![(vec![4], 1.0)] };
        assert!(bad.validate(4).is_err());
        assert!(bad.validate(5).is_ok());
    }
}
