use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};
use crate::infocore::{DmcChannel, Distribution, PairLaw};

/// How the typicality slack is chosen for a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaRule {
    Absolute { delta: f64 },
    /// `delta = fraction * I`.
    Relative { fraction: f64 },
    /// `delta = max(fraction * I, sigmas * sd / sqrt(len))`, where `sd` is the
    /// per-symbol standard deviation of the information density.
    Adaptive { fraction: f64, sigmas: f64 },
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::Relative { fraction: 0.1 }
    }
}

impl DeltaRule {
    pub fn delta(&self, info: f64, sd: f64, len: usize) -> f64 {
        let d = match *self {
            DeltaRule::Absolute { delta } => delta,
            DeltaRule::Relative { fraction } => fraction * info,
            DeltaRule::Adaptive { fraction, sigmas } => {
                (fraction * info).max(sigmas * sd / (len.max(1) as f64).sqrt())
            }
        };
        d.max(1e-9)
    }
}

/// Decoder knobs shared by every stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TypicalityParams {
    pub delta: DeltaRule,
    /// Extra random codewords tested explicitly per block, besides the
    /// codewords actually present around the block.
    pub competitors: usize,
    /// Codebooks up to this size are searched exhaustively.
    pub exhaustive_cap: u128,
    /// Account for untested codewords through the ensemble false-alarm bound.
    pub analytic_tail: bool,
}

impl Default for TypicalityParams {
    fn default() -> Self {
        TypicalityParams {
            delta: DeltaRule::default(),
            competitors: 16,
            exhaustive_cap: 256,
            analytic_tail: true,
        }
    }
}

impl TypicalityParams {
    pub fn with_delta(delta: DeltaRule) -> Self {
        TypicalityParams { delta, ..Default::default() }
    }
}

/// Reference law of one segment with its slack and flattened density table.
#[derive(Debug, Clone)]
pub struct SegmentLaw {
    pub law: PairLaw,
    pub info: f64,
    pub sd: f64,
    pub delta: f64,
    pub len: usize,
    ny: usize,
    table: Vec<f64>,
}

impl SegmentLaw {
    pub fn new(law: PairLaw, len: usize, rule: &DeltaRule) -> Self {
        let info = law.mutual_information();
        let sd = law.density_std();
        let ny = law.output_size();
        let table = (0..law.input_size() * ny)
            .map(|c| law.density(c / ny, c % ny))
            .collect();
        SegmentLaw {
            delta: rule.delta(info, sd, len),
            info,
            sd,
            len,
            ny,
            law,
            table,
        }
    }

    /// Law of a single-sender `stage` channel with input law `p`.
    pub fn from_channel(p: &Distribution, stage: &DmcChannel, len: usize, rule: &DeltaRule) -> Result<Self> {
        Ok(SegmentLaw::new(PairLaw::from_channel(p, stage)?, len, rule))
    }

    #[inline]
    pub fn density(&self, x: u8, z: u32) -> f64 {
        self.table[x as usize * self.ny + z as usize]
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    /// Whether a segment sum over `len` positions is typical.
    #[inline]
    pub fn accepts(&self, sum: f64, len: usize) -> bool {
        len == 0 || (sum.is_finite() && (sum / len as f64 - self.info).abs() <= self.delta)
    }

    /// `log2` of a Chernoff bound on the probability that a codeword drawn
    /// independently of the output passes this segment over `len` positions.
    pub fn log2_false_alarm(&self, len: usize) -> f64 {
        if len == 0 {
            return 0.0;
        }
        let target = self.info - self.delta;
        let px = self.law.input_marginal();
        let qy = self.law.output_marginal();
        let cells: Vec<(f64, f64)> = (0..px.len() * self.ny)
            .filter_map(|c| {
                let w = px[c / self.ny] * qy[c % self.ny];
                let d = self.table[c];
                (w > 0.0 && d.is_finite()).then(|| (w.log2(), d))
            })
            .collect();
        if cells.is_empty() {
            return f64::NEG_INFINITY;
        }
        // per-symbol exponent log2 E[2^{lambda i}] - lambda * target
        let f = |lam: f64| {
            let m = cells
                .iter()
                .map(|(lw, d)| lw + lam * d)
                .fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = cells.iter().map(|(lw, d)| (lw + lam * d - m).exp2()).sum();
            m + s.log2() - lam * target
        };
        let (mut a, mut b) = (1e-9, 60.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..120 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let best = fc.min(fd).min(f(1.0)).min(f(60.0));
        (best * len as f64).min(0.0)
    }
}

/// Rejects malformed slack choices early.
pub fn check_rule(rule: &DeltaRule) -> Result<()> {
    let ok = match *rule {
        DeltaRule::Absolute { delta } => delta > 0.0,
        DeltaRule::Relative { fraction } => fraction > 0.0,
        DeltaRule::Adaptive { fraction, sigmas } => fraction >= 0.0 && sigmas >= 0.0 && fraction + sigmas > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(AmacError::InvalidParameter(format!("typicality slack {rule:?} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;

    #[test]
    fn false_alarm_bounds() {
        let law = PairLaw::from_channel(&Distribution::uniform(2), &channels::bsc(0.1).unwrap()).unwrap();
        let seg = SegmentLaw::new(law, 400, &DeltaRule::Relative { fraction: 0.1 });
        let markov = -(seg.info - seg.delta) * 400.0;
        let lb = seg.log2_false_alarm(400);
        assert!(lb <= markov + 1e-6);

        let clean = PairLaw::from_channel(&Distribution::uniform(2), &channels::identity(2)).unwrap();
        let seg = SegmentLaw::new(clean, 100, &DeltaRule::Relative { fraction: 0.1 });
        assert!((seg.log2_false_alarm(100) + 100.0).abs() < 1e-6);
    }
}
