//! Finite-alphabet probability kernel: distributions, multi-sender channels,
//! joint laws and the information measures built on them.
//!
//! All logarithms are base 2, so every quantity is in bits. Channel
//! transition tables are stored row-major with the first sender's symbol
//! varying slowest and the output symbol fastest.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};

/// Tolerance for validating stored probability vectors.
pub const PROB_TOL: f64 = 1e-12;

/// Hard cap on dense table size (input tuples times output symbols).
pub const MAX_TABLE_ENTRIES: usize = 10_000_000;

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// A probability vector over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = AmacError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(AmacError::InvalidDistribution("empty alphabet".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(AmacError::InvalidDistribution(format!(
                "entry {i} is {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(AmacError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Distribution { probs })
    }

    /// Builds a distribution after rescaling to unit mass. Used for values
    /// produced by arithmetic that is exact up to rounding.
    pub fn normalized(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -1e-12 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(AmacError::InvalidDistribution("zero total mass".into()));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Distribution::new(probs)
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution over empty alphabet");
        Distribution {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len);
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Distribution { probs }
    }

    /// Binary distribution with `P(1) = p1`.
    pub fn bernoulli(p1: f64) -> Result<Self> {
        Distribution::new(vec![1.0 - p1, p1])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// Cumulative distribution `F(x) = P(X <= x)`; the last entry is forced to 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    /// Inverse-CDF sampling from a uniform variate in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding: fall back to the last symbol with positive mass
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    pub fn support_min(&self) -> usize {
        self.probs.iter().position(|p| *p > 0.0).unwrap_or(0)
    }
}

/// Entropy in bits, with `0 log 0 = 0`.
pub fn entropy(d: &Distribution) -> f64 {
    d.probs.iter().map(|&p| plogp(p)).sum()
}

/// Binary entropy function.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Set of senders as a bitmask; bit `m` is sender `m` (0-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SenderSet(pub u32);

impl SenderSet {
    pub const EMPTY: SenderSet = SenderSet(0);

    pub fn full(k: usize) -> Self {
        SenderSet(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(m: usize) -> Self {
        SenderSet(1 << m)
    }

    pub fn from_senders(senders: &[usize]) -> Self {
        SenderSet(senders.iter().fold(0u32, |acc, &m| acc | (1 << m)))
    }

    pub fn contains(self, m: usize) -> bool {
        self.0 & (1 << m) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: SenderSet) -> SenderSet {
        SenderSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SenderSet) -> SenderSet {
        SenderSet(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: SenderSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, k: usize) -> SenderSet {
        SenderSet(!self.0 & SenderSet::full(k).0)
    }

    pub fn with(self, m: usize) -> SenderSet {
        SenderSet(self.0 | (1 << m))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |m| self.0 & (1 << m) != 0)
    }

    pub fn members(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All non-empty subsets of `[k]`, ordered by bitmask.
    pub fn all_nonempty(k: usize) -> impl Iterator<Item = SenderSet> {
        (1..(1u32 << k)).map(SenderSet)
    }

    /// Position of this set in a `2^k - 1` bounds table.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Debug for SenderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Printed with 1-based sender numbers, e.g. `{1,3}`.
impl fmt::Display for SenderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|m| (m + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Mixed-radix index of an input tuple (first coordinate slowest).
pub fn tuple_index(radices: &[usize], tuple: &[usize]) -> usize {
    tuple
        .iter()
        .zip(radices)
        .fold(0usize, |acc, (&x, &r)| acc * r + x)
}

/// Inverse of [`tuple_index`].
pub fn tuple_of(radices: &[usize], mut index: usize, out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
}

/// A `K`-sender discrete memoryless channel `W(y | x_1..x_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcChannel {
    inputs: Vec<usize>,
    outputs: usize,
    transition: Vec<f64>,
}

impl DmcChannel {
    pub fn new(inputs: Vec<usize>, outputs: usize, transition: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(AmacError::InvalidChannel("no senders".into()));
        }
        if inputs.len() > 16 {
            return Err(AmacError::InvalidChannel("more than 16 senders".into()));
        }
        if inputs.iter().any(|&a| a == 0) || outputs == 0 {
            return Err(AmacError::InvalidChannel("empty alphabet".into()));
        }
        let rows = inputs
            .iter()
            .try_fold(1usize, |acc, &a| acc.checked_mul(a))
            .ok_or_else(|| AmacError::Capacity("input alphabet product overflows".into()))?;
        let entries = rows
            .checked_mul(outputs)
            .filter(|&e| e <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| {
                AmacError::Capacity(format!(
                    "channel table exceeds {MAX_TABLE_ENTRIES} entries"
                ))
            })?;
        if transition.len() != entries {
            return Err(AmacError::InvalidChannel(format!(
                "expected {entries} transition entries, got {}",
                transition.len()
            )));
        }
        let mut tuple = vec![0; inputs.len()];
        for (r, row) in transition.chunks(outputs).enumerate() {
            let total: f64 = row.iter().sum();
            let bad = row.iter().any(|p| !p.is_finite() || *p < 0.0);
            if bad || (total - 1.0).abs() > PROB_TOL {
                tuple_of(&inputs, r, &mut tuple);
                return Err(AmacError::InvalidChannel(format!(
                    "row {r} (inputs {tuple:?}) is not a probability vector (sum {total})"
                )));
            }
        }
        Ok(DmcChannel {
            inputs,
            outputs,
            transition,
        })
    }

    /// Builds a channel from a function returning the output law of each input tuple.
    pub fn from_fn<F>(inputs: Vec<usize>, outputs: usize, mut law: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let rows: usize = inputs.iter().product();
        let mut transition = Vec::with_capacity(rows * outputs);
        let mut tuple = vec![0; inputs.len()];
        for r in 0..rows {
            tuple_of(&inputs, r, &mut tuple);
            let row = law(&tuple);
            if row.len() != outputs {
                return Err(AmacError::InvalidChannel(format!(
                    "row {r} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            transition.extend(row);
        }
        DmcChannel::new(inputs, outputs, transition)
    }

    pub fn num_senders(&self) -> usize {
        self.inputs.len()
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    pub fn num_input_tuples(&self) -> usize {
        self.transition.len() / self.outputs
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn row(&self, input_index: usize) -> &[f64] {
        &self.transition[input_index * self.outputs..(input_index + 1) * self.outputs]
    }

    pub fn row_for(&self, tuple: &[usize]) -> &[f64] {
        self.row(tuple_index(&self.inputs, tuple))
    }

    pub fn prob(&self, tuple: &[usize], y: usize) -> f64 {
        self.row_for(tuple)[y]
    }

    pub fn check_input(&self, p: &ProductInput) -> Result<()> {
        if p.num_senders() != self.num_senders() {
            return Err(AmacError::ShapeMismatch(format!(
                "channel has {} senders, input has {}",
                self.num_senders(),
                p.num_senders()
            )));
        }
        for (m, (d, &a)) in p.marginals().iter().zip(&self.inputs).enumerate() {
            if d.len() != a {
                return Err(AmacError::ShapeMismatch(format!(
                    "sender {} alphabet has {a} symbols, distribution has {}",
                    m + 1,
                    d.len()
                )));
            }
        }
        Ok(())
    }
}

/// Independent per-sender input distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductInput {
    marginals: Vec<Distribution>,
}

impl ProductInput {
    pub fn new(marginals: Vec<Distribution>) -> Self {
        ProductInput { marginals }
    }

    pub fn uniform(sizes: &[usize]) -> Self {
        ProductInput::new(sizes.iter().map(|&a| Distribution::uniform(a)).collect())
    }

    pub fn num_senders(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Distribution] {
        &self.marginals
    }

    pub fn marginal(&self, m: usize) -> &Distribution {
        &self.marginals[m]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.marginals.iter().map(Distribution::len).collect()
    }

    /// Joint pmf over input tuples, first coordinate slowest.
    pub fn joint(&self) -> Vec<f64> {
        let sizes = self.sizes();
        let rows: usize = sizes.iter().product();
        let mut tuple = vec![0; sizes.len()];
        (0..rows)
            .map(|r| {
                tuple_of(&sizes, r, &mut tuple);
                tuple
                    .iter()
                    .zip(&self.marginals)
                    .map(|(&x, d)| d.prob(x))
                    .product()
            })
            .collect()
    }

    pub fn with_marginal(&self, m: usize, d: Distribution) -> Self {
        let mut marginals = self.marginals.clone();
        marginals[m] = d;
        ProductInput { marginals }
    }
}

/// Joint law of `(X_1..X_K, Y)` for a channel and an input law.
#[derive(Debug, Clone)]
pub struct JointSystem {
    inputs: Vec<usize>,
    outputs: usize,
    input_law: Vec<f64>,
    table: Vec<f64>,
}

impl JointSystem {
    pub fn new(w: &DmcChannel, p: &ProductInput) -> Result<Self> {
        w.check_input(p)?;
        Ok(Self::build(w, p.joint()))
    }

    /// Joint system for an arbitrary (possibly dependent) input law.
    pub fn from_input_law(w: &DmcChannel, input_law: Vec<f64>) -> Result<Self> {
        if input_law.len() != w.num_input_tuples() {
            return Err(AmacError::ShapeMismatch(format!(
                "input law has {} entries, channel has {} input tuples",
                input_law.len(),
                w.num_input_tuples()
            )));
        }
        let total: f64 = input_law.iter().sum();
        if (total - 1.0).abs() > 1e-9 || input_law.iter().any(|p| *p < 0.0) {
            return Err(AmacError::InvalidDistribution(format!(
                "input law sums to {total}"
            )));
        }
        Ok(Self::build(w, input_law))
    }

    fn build(w: &DmcChannel, input_law: Vec<f64>) -> Self {
        let ny = w.output_size();
        let mut table = Vec::with_capacity(input_law.len() * ny);
        for (r, &px) in input_law.iter().enumerate() {
            table.extend(w.row(r).iter().map(|&t| px * t));
        }
        JointSystem {
            inputs: w.input_sizes().to_vec(),
            outputs: ny,
            input_law,
            table,
        }
    }

    pub fn num_senders(&self) -> usize {
        self.inputs.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn input_law(&self) -> &[f64] {
        &self.input_law
    }

    /// `H(Y | X_T)` in bits.
    pub fn conditional_output_entropy(&self, given: SenderSet) -> f64 {
        let k = self.inputs.len();
        let ny = self.outputs;
        let members = given.members();
        let radices: Vec<usize> = members.iter().map(|&m| self.inputs[m]).collect();
        let cells: usize = radices.iter().product();
        let mut marg = vec![0.0; cells * ny];
        let mut tuple = vec![0; k];
        let mut proj = vec![0; members.len()];
        for r in 0..self.input_law.len() {
            if self.input_law[r] == 0.0 {
                continue;
            }
            tuple_of(&self.inputs, r, &mut tuple);
            for (slot, &m) in proj.iter_mut().zip(&members) {
                *slot = tuple[m];
            }
            let c = tuple_index(&radices, &proj);
            let dst = &mut marg[c * ny..(c + 1) * ny];
            for (d, &v) in dst.iter_mut().zip(&self.table[r * ny..(r + 1) * ny]) {
                *d += v;
            }
        }
        let joint: f64 = marg.iter().map(|&p| plogp(p)).sum();
        let cond: f64 = marg
            .chunks(ny)
            .map(|row| plogp(row.iter().sum::<f64>()))
            .sum();
        joint - cond
    }

    /// `I(X_S ; Y | X_{S^c})` in bits.
    pub fn conditional_mutual_information(&self, s: SenderSet) -> Result<f64> {
        let k = self.num_senders();
        if s.is_empty() {
            return Err(AmacError::EmptySubset);
        }
        if !s.is_subset_of(SenderSet::full(k)) {
            return Err(AmacError::ShapeMismatch(format!(
                "subset {s} not within {k} senders"
            )));
        }
        let rest = s.complement(k);
        let v = self.conditional_output_entropy(rest)
            - self.conditional_output_entropy(SenderSet::full(k));
        Ok(v.max(0.0))
    }

    /// Marginal law of `X_S` as a table over `S`'s tuples (ascending sender order).
    pub fn input_marginal(&self, s: SenderSet) -> Vec<f64> {
        let members = s.members();
        let radices: Vec<usize> = members.iter().map(|&m| self.inputs[m]).collect();
        let mut out = vec![0.0; radices.iter().product()];
        let mut tuple = vec![0; self.inputs.len()];
        let mut proj = vec![0; members.len()];
        for (r, &p) in self.input_law.iter().enumerate() {
            tuple_of(&self.inputs, r, &mut tuple);
            for (slot, &m) in proj.iter_mut().zip(&members) {
                *slot = tuple[m];
            }
            out[tuple_index(&radices, &proj)] += p;
        }
        out
    }

    pub fn output_distribution(&self) -> Distribution {
        let ny = self.outputs;
        let mut q = vec![0.0; ny];
        for row in self.table.chunks(ny) {
            for (acc, v) in q.iter_mut().zip(row) {
                *acc += v;
            }
        }
        Distribution::normalized(q).expect("joint table has unit mass")
    }
}

pub fn conditional_mutual_information(js: &JointSystem, s: SenderSet) -> Result<f64> {
    js.conditional_mutual_information(s)
}

pub fn output_distribution(js: &JointSystem) -> Distribution {
    js.output_distribution()
}

/// Single-sender channel seen when decoding `target` after the ordered
/// senders `decoded`, with every other sender averaged out as noise.
///
/// The output symbol encodes `(y, x_{A_0}, x_{A_1}, ...)` as
/// `y + |Y| * (x_{A_0} + |X_{A_0}| * (x_{A_1} + ...))`.
pub fn stage_channel(
    w: &DmcChannel,
    p: &ProductInput,
    decoded: &[usize],
    target: usize,
) -> Result<DmcChannel> {
    w.check_input(p)?;
    let k = w.num_senders();
    if target >= k {
        return Err(AmacError::SenderIndex {
            index: target,
            senders: k,
        });
    }
    let mut seen = SenderSet::EMPTY;
    for &a in decoded {
        if a >= k {
            return Err(AmacError::SenderIndex { index: a, senders: k });
        }
        if a == target {
            return Err(AmacError::Overlap(target + 1));
        }
        if seen.contains(a) {
            return Err(AmacError::InvalidParameter(format!(
                "sender {} listed twice in decoded set",
                a + 1
            )));
        }
        seen = seen.with(a);
    }
    let ny = w.output_size();
    let sizes = w.input_sizes();
    let nz = decoded
        .iter()
        .fold(ny, |acc, &a| acc * sizes[a]);
    let nx = sizes[target];
    let mut table = vec![0.0; nx * nz];
    let mut tuple = vec![0; k];
    for r in 0..w.num_input_tuples() {
        tuple_of(sizes, r, &mut tuple);
        let weight: f64 = (0..k)
            .filter(|&i| i != target)
            .map(|i| p.marginal(i).prob(tuple[i]))
            .product();
        if weight == 0.0 {
            continue;
        }
        // z = y + ny * (x_A0 + |X_A0| * (x_A1 + ...))
        let mut base = 0usize;
        for &a in decoded.iter().rev() {
            base = base * sizes[a] + tuple[a];
        }
        let row = &mut table[tuple[target] * nz..(tuple[target] + 1) * nz];
        for (y, &t) in w.row(r).iter().enumerate() {
            row[y + ny * base] += weight * t;
        }
    }
    DmcChannel::new(vec![nx], nz, table)
}

/// Joint law of one input symbol and one output symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLaw {
    nx: usize,
    ny: usize,
    joint: Vec<f64>,
    px: Vec<f64>,
    qy: Vec<f64>,
    density: Vec<f64>,
}

impl PairLaw {
    pub fn from_joint(nx: usize, ny: usize, joint: Vec<f64>) -> Result<Self> {
        if joint.len() != nx * ny {
            return Err(AmacError::ShapeMismatch(format!(
                "pair law needs {} entries, got {}",
                nx * ny,
                joint.len()
            )));
        }
        let total: f64 = joint.iter().sum();
        if (total - 1.0).abs() > 1e-9 || joint.iter().any(|p| *p < 0.0) {
            return Err(AmacError::InvalidDistribution(format!(
                "pair law sums to {total}"
            )));
        }
        let mut px = vec![0.0; nx];
        let mut qy = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                let v = joint[x * ny + y];
                px[x] += v;
                qy[y] += v;
            }
        }
        let density = (0..nx * ny)
            .map(|c| {
                let v = joint[c];
                if v > 0.0 {
                    (v / (px[c / ny] * qy[c % ny])).log2()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Ok(PairLaw {
            nx,
            ny,
            joint,
            px,
            qy,
            density,
        })
    }

    /// Law of `(X, Y)` for `X ~ p` through a single-sender channel.
    pub fn from_channel(p: &Distribution, w: &DmcChannel) -> Result<Self> {
        if w.num_senders() != 1 || w.input_sizes()[0] != p.len() {
            return Err(AmacError::ShapeMismatch(
                "pair law needs a single-sender channel matching the input".into(),
            ));
        }
        let ny = w.output_size();
        let mut joint = Vec::with_capacity(p.len() * ny);
        for x in 0..p.len() {
            joint.extend(w.row(x).iter().map(|&t| p.prob(x) * t));
        }
        PairLaw::from_joint(p.len(), ny, joint)
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn input_marginal(&self) -> &[f64] {
        &self.px
    }

    pub fn output_marginal(&self) -> &[f64] {
        &self.qy
    }

    /// `log2 P(x,y) / (p(x) q(y))`, or `-inf` when `P(x,y) = 0`.
    #[inline]
    pub fn density(&self, x: usize, y: usize) -> f64 {
        self.density[x * self.ny + y]
    }

    pub fn mutual_information(&self) -> f64 {
        self.joint
            .iter()
            .zip(&self.density)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, d)| p * d)
            .sum()
    }

    /// Standard deviation of the information density under the law.
    pub fn density_std(&self) -> f64 {
        let mean = self.mutual_information();
        let var: f64 = self
            .joint
            .iter()
            .zip(&self.density)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, d)| p * (d - mean) * (d - mean))
            .sum();
        var.sqrt()
    }
}

/// Average per-symbol information density `(1/n) sum log2 P_i / (p_i q_i)`.
///
/// Returns `-inf` when any position pairs symbols of zero joint mass.
pub fn information_density_sum(laws: &[&PairLaw], xs: &[usize], ys: &[usize]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() != laws.len() {
        return Err(AmacError::ShapeMismatch(format!(
            "{} laws, {} inputs, {} outputs",
            laws.len(),
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(AmacError::InvalidParameter("empty words".into()));
    }
    let mut total = 0.0;
    for ((law, &x), &y) in laws.iter().zip(xs).zip(ys) {
        let d = law.density(x, y);
        if d == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += d;
    }
    Ok(total / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&Distribution::uniform(2)), 1.0, epsilon = 1e-15);
        assert_eq!(entropy(&Distribution::point_mass(3, 1)), 0.0);
        let d = Distribution::new(vec![0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(entropy(&d), 0.811_278_124_459_132_8, epsilon = 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.3, 0.7 + 5e-13]).is_ok());
    }

    #[test]
    fn malformed_row_is_named() {
        let err = DmcChannel::new(vec![2], 2, vec![1.0, 0.0, 0.4, 0.4]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn example4_cmi() {
        let w = channels::example4();
        let js = JointSystem::new(&w, &ProductInput::uniform(&[2, 2])).unwrap();
        let b1 = js.conditional_mutual_information(SenderSet(0b01)).unwrap();
        let b2 = js.conditional_mutual_information(SenderSet(0b10)).unwrap();
        let b12 = js.conditional_mutual_information(SenderSet(0b11)).unwrap();
        assert_abs_diff_eq!(b1, 0.655_639, epsilon = 1e-6);
        assert_abs_diff_eq!(b2, 0.655_639, epsilon = 1e-6);
        assert_abs_diff_eq!(b12, binary_entropy(5.0 / 8.0) - 0.25, epsilon = 1e-12);
        assert!(js.conditional_mutual_information(SenderSet::EMPTY).is_err());
    }

    #[test]
    fn identity_channel_cmi_and_output() {
        let w = channels::identity(2);
        let js = JointSystem::new(&w, &ProductInput::uniform(&[2])).unwrap();
        assert_abs_diff_eq!(
            js.conditional_mutual_information(SenderSet(1)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(js.output_distribution().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn output_marginals() {
        let js = JointSystem::new(&channels::example4(), &ProductInput::uniform(&[2, 2])).unwrap();
        let q = js.output_distribution();
        assert_abs_diff_eq!(q.prob(0), 3.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.prob(1), 5.0 / 8.0, epsilon = 1e-15);

        let constant = DmcChannel::from_fn(vec![3], 2, |_| vec![1.0, 0.0]).unwrap();
        let js = JointSystem::new(&constant, &ProductInput::uniform(&[3])).unwrap();
        assert_eq!(js.output_distribution().probs(), &[1.0, 0.0]);
    }

    #[test]
    fn stage_channel_examples() {
        let w = channels::bsc(0.1).unwrap();
        let p = ProductInput::uniform(&[2]);
        assert_eq!(stage_channel(&w, &p, &[], 0).unwrap(), w);

        let w = channels::example4();
        let p = ProductInput::uniform(&[2, 2]);
        let w1 = stage_channel(&w, &p, &[], 0).unwrap();
        assert_abs_diff_eq!(w1.prob(&[0], 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w1.prob(&[1], 1), 0.75, epsilon = 1e-15);

        let w2 = stage_channel(&w, &p, &[0], 1).unwrap();
        assert_eq!(w2.output_size(), 4);
        let law = PairLaw::from_channel(p.marginal(1), &w2).unwrap();
        assert_abs_diff_eq!(law.mutual_information(), 0.655_639, epsilon = 1e-6);

        assert!(matches!(
            stage_channel(&w, &p, &[1], 1),
            Err(AmacError::Overlap(2))
        ));
    }

    #[test]
    fn density_examples() {
        let law = PairLaw::from_channel(&Distribution::uniform(2), &channels::identity(2)).unwrap();
        let laws = vec![&law; 4];
        let v = information_density_sum(&laws, &[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        let v = information_density_sum(&laws, &[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);

        let bsc = PairLaw::from_channel(&Distribution::uniform(2), &channels::bsc(0.1).unwrap())
            .unwrap();
        let laws = vec![&bsc; 4];
        let v = information_density_sum(&laws, &[0, 0, 0, 0], &[0, 0, 0, 1]).unwrap();
        let want = (3.0 * (0.9f64 / 0.5).log2() + (0.1f64 / 0.5).log2()) / 4.0;
        assert_abs_diff_eq!(v, want, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.055_516, epsilon = 1e-6);
        assert!(information_density_sum(&laws[..3], &[0, 0, 0, 0], &[0, 0, 0, 1]).is_err());
    }

    #[test]
    fn sender_set_display_and_ops() {
        let s = SenderSet::from_senders(&[0, 2]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.complement(3), SenderSet(0b010));
        assert_eq!(SenderSet::all_nonempty(3).count(), 7);
    }
}
