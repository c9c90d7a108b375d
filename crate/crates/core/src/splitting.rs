//! Rate splitting with the max combiner: a sender `m` with law `p` is
//! replaced by two virtual senders `ma`, `mb` whose symbols enter the
//! channel as `max(x_a, x_b)`. Sweeping the split parameter moves the
//! lifted successive-decoding vertex along an edge of the original face.

use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};
use crate::infocore::{tuple_of, Distribution, DmcChannel, ProductInput, SenderSet};
use crate::regions::{self, dominant_face_contains, edge_type, EdgeType, Ordering, RateVector};

const SCAN_POINTS: usize = 64;

/// One sender's split into two virtual senders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub sender: usize,
    pub theta: f64,
    pub p_a: Distribution,
    pub p_b: Distribution,
}

fn pmf_from_cdf(cdf: &[f64]) -> Result<Distribution> {
    let mut prev = 0.0;
    let probs = cdf
        .iter()
        .map(|&c| {
            let p = (c - prev).max(0.0);
            prev = c;
            p
        })
        .collect();
    Distribution::normalized(probs)
}

/// CDF factorization `F_a = min(F / theta, 1)`, `F_b = max(F, theta)`, so
/// that `F_a F_b = F` and `max(X_a, X_b)` has law `p`.
pub fn split_distribution(p: &Distribution, theta: f64) -> Result<(Distribution, Distribution)> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(AmacError::InvalidParameter(format!(
            "split parameter {theta} outside (0, 1]"
        )));
    }
    let f = p.cdf();
    let fa: Vec<f64> = f.iter().map(|&v| (v / theta).min(1.0)).collect();
    let fb: Vec<f64> = f.iter().map(|&v| v.max(theta)).collect();
    Ok((pmf_from_cdf(&fa)?, pmf_from_cdf(&fb)?))
}

/// Exact law of `max(X_a, X_b)` for independent `X_a ~ a`, `X_b ~ b`.
pub fn max_law(a: &Distribution, b: &Distribution) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, pa) in a.probs().iter().enumerate() {
        for (j, pb) in b.probs().iter().enumerate() {
            out[i.max(j)] += pa * pb;
        }
    }
    out
}

/// `base` with sender `split` replaced in place by two virtual senders
/// (`split` and `split + 1` in the lifted indexing) combined by `max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedChannel {
    pub base: DmcChannel,
    pub split: usize,
    pub channel: DmcChannel,
}

impl LiftedChannel {
    /// Lifted index of original sender `m` (`ma` for the split sender).
    pub fn lifted_index(&self, m: usize) -> usize {
        if m <= self.split {
            m
        } else {
            m + 1
        }
    }

    /// Lifted input law with the split sender's law replaced by `(p_a, p_b)`.
    pub fn lift_input(&self, p: &ProductInput, p_a: &Distribution, p_b: &Distribution) -> ProductInput {
        let mut marginals = Vec::with_capacity(p.num_senders() + 1);
        for (m, d) in p.marginals().iter().enumerate() {
            if m == self.split {
                marginals.push(p_a.clone());
                marginals.push(p_b.clone());
            } else {
                marginals.push(d.clone());
            }
        }
        ProductInput::new(marginals)
    }

    /// Sums virtual-sender coordinates back onto the original senders.
    pub fn regroup(&self, lifted: &RateVector) -> RateVector {
        let k = self.base.num_senders();
        let rates = (0..k)
            .map(|m| {
                let i = self.lifted_index(m);
                if m == self.split {
                    lifted[i] + lifted[i + 1]
                } else {
                    lifted[i]
                }
            })
            .collect();
        RateVector::new(rates).expect("sums of non-negative rates")
    }
}

pub fn lift_channel(w: &DmcChannel, m: usize) -> Result<LiftedChannel> {
    let k = w.num_senders();
    if m >= k {
        return Err(AmacError::SenderIndex { index: m, senders: k });
    }
    let mut sizes = w.input_sizes().to_vec();
    sizes.insert(m, sizes[m]);
    let mut base_tuple = vec![0; k];
    let channel = DmcChannel::from_fn(sizes, w.output_size(), |x| {
        for (i, slot) in base_tuple.iter_mut().enumerate() {
            *slot = match i.cmp(&m) {
                std::cmp::Ordering::Less => x[i],
                std::cmp::Ordering::Equal => x[m].max(x[m + 1]),
                std::cmp::Ordering::Greater => x[i + 1],
            };
        }
        w.row_for(&base_tuple).to_vec()
    })?;
    Ok(LiftedChannel {
        base: w.clone(),
        split: m,
        channel,
    })
}

/// Result of splitting one sender of a 2-sender channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSenderSplit {
    pub split: SplitSpec,
    pub lifted: LiftedChannel,
    pub inputs: ProductInput,
    /// `(a, other, b)` in lifted indices.
    pub ordering: Ordering,
    /// Lifted vertex for `ordering`.
    pub vertex: RateVector,
    /// Whether the swept coordinate was monotone on the scan grid.
    pub monotone_scan: bool,
}

impl TwoSenderSplit {
    pub fn rate_a(&self) -> f64 {
        self.vertex[self.lifted.split]
    }

    pub fn rate_b(&self) -> f64 {
        self.vertex[self.lifted.split + 1]
    }
}

/// Finds the split of sender `split` (0 or 1) of `w` whose `(a, other, b)`
/// successive-decoding vertex hits `target`, a dominant-face point of
/// `R[w; p x q]`.
pub fn two_sender_split_point(
    w: &DmcChannel,
    p: &Distribution,
    q: &Distribution,
    target: &RateVector,
    split: usize,
) -> Result<TwoSenderSplit> {
    if w.num_senders() != 2 || split > 1 {
        return Err(AmacError::InvalidParameter(
            "need a 2-sender channel and split sender 0 or 1".into(),
        ));
    }
    let input = ProductInput::new(vec![p.clone(), q.clone()]);
    let poly = regions::polytope(w, &input)?;
    if !dominant_face_contains(&poly, target, 1e-6)? {
        return Err(AmacError::NotOnDominantFace {
            gap: regions::SubsetBounds::sum_bound(&poly) - target.total(),
        });
    }
    let other = 1 - split;
    let law = input.marginal(split).clone();
    let lifted = lift_channel(w, split)?;
    let ia = split;
    let ib = split + 1;
    let io = lifted.lifted_index(other);
    let ordering = Ordering::new(vec![ia, io, ib])?;

    let eval = |theta: f64| -> Result<(RateVector, ProductInput, Distribution, Distribution)> {
        let (pa, pb) = split_distribution(&law, theta)?;
        let lifted_in = lifted.lift_input(&input, &pa, &pb);
        let lp = regions::polytope(&lifted.channel, &lifted_in)?;
        Ok((regions::vertex(&lp, &ordering)?, lifted_in, pa, pb))
    };
    let goal = target[other];
    let g = |theta: f64| -> Result<f64> { Ok(eval(theta)?.0[io] - goal) };

    let lo = law.prob(law.support_min()).max(1e-12);
    let hi = 1.0;
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|j| {
            let t = lo + (hi - lo) * j as f64 / (SCAN_POINTS - 1) as f64;
            g(t).map(|v| (t, v))
        })
        .collect::<Result<_>>()?;
    let increasing = scan.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    let decreasing = scan.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);

    let theta = if let Some(&(t, _)) = scan.iter().rev().find(|(_, v)| v.abs() <= 1e-10) {
        t
    } else {
        let bracket = scan
            .windows(2)
            .find(|w| (w[0].1 <= 0.0) != (w[1].1 <= 0.0))
            .map(|w| (w[0], w[1]));
        let Some(((mut a, mut ga), (mut b, _))) = bracket else {
            let (min, max) = scan
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, v)| (a.min(*v), b.max(*v)));
            return Err(AmacError::Numerical(format!(
                "split sweep never reaches the target: swept coordinate minus target spans [{min:.3e}, {max:.3e}]"
            )));
        };
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let gm = g(mid)?;
            if gm.abs() <= 1e-12 || b - a <= 1e-15 {
                a = mid;
                b = mid;
                break;
            }
            if (gm <= 0.0) == (ga <= 0.0) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let (vertex, inputs, p_a, p_b) = eval(theta)?;
    if (vertex[ia] + vertex[ib] - target[split]).abs() > 1e-4 || (vertex[io] - goal).abs() > 1e-4 {
        return Err(AmacError::Numerical(format!(
            "split vertex {:?} misses target {:?}",
            vertex.as_slice(),
            target.as_slice()
        )));
    }
    Ok(TwoSenderSplit {
        split: SplitSpec {
            sender: split,
            theta,
            p_a,
            p_b,
        },
        lifted,
        inputs,
        ordering,
        vertex,
        monotone_scan: increasing || decreasing,
    })
}

/// 2-sender channel seen by `pair`, with the remaining sender either
/// appended to the output (`known`) or averaged out as noise.
fn reduce_to_pair(w: &DmcChannel, p: &ProductInput, pair: [usize; 2], rest: usize, known: bool) -> Result<DmcChannel> {
    let sizes = w.input_sizes();
    let ny = w.output_size();
    let nz = if known { ny * sizes[rest] } else { ny };
    let mut table = vec![0.0; sizes[pair[0]] * sizes[pair[1]] * nz];
    let mut tuple = vec![0; 3];
    for r in 0..w.num_input_tuples() {
        tuple_of(sizes, r, &mut tuple);
        let weight = p.marginal(rest).prob(tuple[rest]);
        let row_idx = tuple[pair[0]] * sizes[pair[1]] + tuple[pair[1]];
        let offset = if known { ny * tuple[rest] } else { 0 };
        for (y, &t) in w.row(r).iter().enumerate() {
            table[row_idx * nz + offset + y] += weight * t;
        }
    }
    DmcChannel::new(vec![sizes[pair[0]], sizes[pair[1]]], nz, table)
}

/// Split realizing a 3-sender dominant-face edge point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub edge: EdgeType,
    pub split: SplitSpec,
    pub lifted: LiftedChannel,
    pub inputs: ProductInput,
    /// Decoding order in lifted indices.
    pub ordering: Ordering,
    /// Names of the lifted senders, e.g. `["1a", "1b", "2", "3"]`.
    pub labels: Vec<String>,
    /// Lifted vertex for `ordering`.
    pub vertex: RateVector,
}

impl EdgeSplit {
    /// Ordering written with sender labels, e.g. `(2,1a,3,1b)`.
    pub fn ordering_labels(&self) -> Vec<String> {
        self.ordering
            .as_slice()
            .iter()
            .map(|&i| self.labels[i].clone())
            .collect()
    }
}

/// Splits sender 1 or 2 of a 3-sender channel so that the edge point `r`
/// becomes a vertex of the lifted 4-sender polytope.
///
/// With a 2-element edge type `S` the remaining sender `c` is decoded first
/// and the pair `S` sees `(y, x_c)`; with `S = {s}` the pair `S^c` is
/// decoded first treating `s` as noise and `s` goes last. Sender 1 is split
/// when it is in the pair, otherwise sender 2.
pub fn split_for_edge(w: &DmcChannel, p: &ProductInput, r: &RateVector, tol: f64) -> Result<EdgeSplit> {
    if w.num_senders() != 3 {
        return Err(AmacError::Unsupported(format!(
            "edge splitting needs 3 senders, channel has {}",
            w.num_senders()
        )));
    }
    let poly = regions::polytope(w, p)?;
    let edge = edge_type(&poly, r, tol)?.ok_or_else(|| {
        AmacError::InvalidParameter("point is interior to the dominant face, not on an edge".into())
    })?;
    let s = edge.set();
    let (pair, rest, rest_known) = if s.len() == 2 {
        let m = s.members();
        (
            [m[0], m[1]],
            s.complement(3).members()[0],
            true,
        )
    } else {
        let m = s.complement(3).members();
        ([m[0], m[1]], s.members()[0], false)
    };
    let m = if pair.contains(&0) { 0 } else { 1 };
    let local_split = if pair[0] == m { 0 } else { 1 };
    let reduced = reduce_to_pair(w, p, pair, rest, rest_known)?;
    let target = RateVector::new(vec![r[pair[0]], r[pair[1]]])?;
    let two = two_sender_split_point(
        &reduced,
        p.marginal(pair[0]),
        p.marginal(pair[1]),
        &target,
        local_split,
    )?;

    let lifted = lift_channel(w, m)?;
    let inputs = lifted.lift_input(p, &two.split.p_a, &two.split.p_b);
    let other = pair[1 - local_split];
    let (ia, ib, io, ir) = (m, m + 1, lifted.lifted_index(other), lifted.lifted_index(rest));
    let order = if rest_known {
        vec![ir, ia, io, ib]
    } else {
        vec![ia, io, ib, ir]
    };
    let ordering = Ordering::new(order)?;
    let lp = regions::polytope(&lifted.channel, &inputs)?;
    let vertex = regions::vertex(&lp, &ordering)?;
    let back = lifted.regroup(&vertex);
    if let Some(i) = (0..3).find(|&i| (back[i] - r[i]).abs() > 1e-4) {
        return Err(AmacError::Numerical(format!(
            "lifted vertex regroups to {:?}, off from {:?} at sender {}",
            back.as_slice(),
            r.as_slice(),
            i + 1
        )));
    }
    let labels = (0..4)
        .map(|i| {
            if i == ia {
                format!("{}a", m + 1)
            } else if i == ib {
                format!("{}b", m + 1)
            } else {
                let orig = if i < m { i } else { i - 1 };
                format!("{}", orig + 1)
            }
        })
        .collect();
    Ok(EdgeSplit {
        edge,
        split: SplitSpec {
            sender: m,
            ..two.split
        },
        lifted,
        inputs,
        ordering,
        labels,
        vertex,
    })
}

/// Convenience for sets given as 1-based member lists.
pub fn sender_set_1based(members: &[usize]) -> SenderSet {
    SenderSet::from_senders(&members.iter().map(|m| m - 1).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use crate::regions::{polytope, vertex, SubsetBounds};
    use approx::assert_abs_diff_eq;

    #[test]
    fn split_examples() {
        let u = Distribution::uniform(2);
        let (a, b) = split_distribution(&u, 1.0).unwrap();
        assert_eq!(a.probs(), u.probs());
        assert_eq!(b.probs(), &[1.0, 0.0]);
        let (a, b) = split_distribution(&u, 0.5).unwrap();
        assert_eq!(a.probs(), &[1.0, 0.0]);
        assert_eq!(b.probs(), u.probs());
        let (a, b) = split_distribution(&u, 0.7).unwrap();
        assert_abs_diff_eq!(a.cdf()[0], 5.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.cdf()[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(max_law(&a, &b)[0], 0.5, epsilon = 1e-15);
        assert!(split_distribution(&u, 0.0).is_err());
        assert!(split_distribution(&u, 1.5).is_err());
    }

    #[test]
    fn zero_prefix_split() {
        let p = Distribution::new(vec![0.0, 0.0, 0.4, 0.6]).unwrap();
        let (a, b) = split_distribution(&p, 0.2).unwrap();
        let m = max_law(&a, &b);
        for (x, y) in m.iter().zip(p.probs()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_examples() {
        let w = channels::example4();
        let l = lift_channel(&w, 0).unwrap();
        assert_eq!(l.channel.input_sizes(), &[2, 2, 2]);
        for xa in 0..2 {
            for x2 in 0..2 {
                assert_eq!(l.channel.row_for(&[xa, 0, x2]), w.row_for(&[xa, x2]));
            }
        }
        for xb in 0..2 {
            for x2 in 0..2 {
                assert_eq!(l.channel.row_for(&[1, xb, x2]), w.row_for(&[1, x2]));
            }
        }
        assert!(lift_channel(&w, 2).is_err());

        let (a, b) = split_distribution(&Distribution::uniform(2), 0.7).unwrap();
        let lifted_in = l.lift_input(&ProductInput::uniform(&[2, 2]), &a, &b);
        let q1 = crate::infocore::JointSystem::new(&l.channel, &lifted_in).unwrap().output_distribution();
        let q0 = crate::infocore::JointSystem::new(&w, &ProductInput::uniform(&[2, 2])).unwrap().output_distribution();
        for (x, y) in q1.probs().iter().zip(q0.probs()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_sender_examples() {
        let w = channels::example4();
        let u = Distribution::uniform(2);
        let poly = polytope(&w, &ProductInput::uniform(&[2, 2])).unwrap();
        let v12 = vertex(&poly, &Ordering::new(vec![0, 1]).unwrap()).unwrap();
        let s = two_sender_split_point(&w, &u, &u, &v12, 0).unwrap();
        assert!(s.rate_a().min(s.rate_b()) < 1e-6);
        let v21 = vertex(&poly, &Ordering::new(vec![1, 0]).unwrap()).unwrap();
        let s2 = two_sender_split_point(&w, &u, &u, &v21, 0).unwrap();
        assert!(s2.rate_a().min(s2.rate_b()) < 1e-6);
        assert!((s.split.theta - s2.split.theta).abs() > 0.1);

        let half = poly.sum_bound() / 2.0;
        let mid = RateVector::new(vec![half, half]).unwrap();
        let s = two_sender_split_point(&w, &u, &u, &mid, 0).unwrap();
        assert!(s.monotone_scan);
        assert_abs_diff_eq!(s.rate_a() + s.rate_b(), 0.352_217, epsilon = 1e-4);
        assert_abs_diff_eq!(s.vertex[2], half, epsilon = 1e-4);
    }

    #[test]
    fn edge_split_ordering_13() {
        let w = channels::binary_adder(3);
        let p = ProductInput::new(vec![
            Distribution::bernoulli(0.5).unwrap(),
            Distribution::bernoulli(0.3).unwrap(),
            Distribution::bernoulli(0.6).unwrap(),
        ]);
        let poly = polytope(&w, &p).unwrap();
        let a = vertex(&poly, &Ordering::new(vec![1, 0, 2]).unwrap()).unwrap();
        let b = vertex(&poly, &Ordering::new(vec![1, 2, 0]).unwrap()).unwrap();
        let r = RateVector::combine(&[a, b], &[0.5, 0.5]);
        let e = split_for_edge(&w, &p, &r, 1e-9).unwrap();
        assert_eq!(e.edge.set(), sender_set_1based(&[1, 3]));
        assert_eq!(e.ordering_labels(), vec!["2", "1a", "3", "1b"]);
        assert_abs_diff_eq!(e.vertex.total(), poly.sum_bound(), epsilon = 1e-4);
        let back = e.lifted.regroup(&e.vertex);
        for i in 0..3 {
            assert_abs_diff_eq!(back[i], r[i], epsilon = 1e-4);
        }
    }
}
