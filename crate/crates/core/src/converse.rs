//! Single-letter converse bounds evaluated from codebook statistics: the
//! conditional mutual informations `I(X_{S,Q+D_S} ; Y | X_{S^c,Q+D_{S^c}}, Q, D)`
//! with `Q` uniform on the block positions and `D` the delay vector.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};
use crate::infocore::{DmcChannel, Distribution, JointSystem, SenderSet};
use crate::rng::stream;
use crate::simkernel::{Codebook, CodebookSystem, DelaySystem, SenderCode};
use crate::splitting::max_law;

/// Position tuples evaluated exactly at most; beyond this the bound is
/// estimated by stratified subsampling.
pub const EXACT_CELL_CAP: usize = 1_000_000;
/// Codewords averaged per codebook when the codebook is too large to scan.
pub const SAMPLED_CODEWORDS: usize = 4096;
const SCAN_LIMIT: u128 = 1 << 16;
const ENUMERATION_OPS: u128 = 200_000_000;

/// Per-position input laws of every sender, averaged over uniform messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionLaws {
    /// `laws[m][pos]`.
    pub laws: Vec<Vec<Distribution>>,
    /// Whether some codebook was subsampled.
    pub sampled: bool,
}

impl PositionLaws {
    pub fn n(&self) -> usize {
        self.laws[0].len()
    }

    pub fn num_senders(&self) -> usize {
        self.laws.len()
    }

    fn product(&self, positions: &[usize]) -> Vec<Vec<f64>> {
        positions
            .iter()
            .enumerate()
            .map(|(m, &q)| self.laws[m][q].probs().to_vec())
            .collect()
    }
}

fn codebook_marginals(book: &Codebook, seed: u64) -> (Vec<Vec<f64>>, bool) {
    let n = book.n;
    let q = book.schedule.alphabet();
    let mut counts = vec![vec![0.0f64; q]; n];
    let (indices, sampled): (Vec<u128>, bool) = match book.size.exact {
        Some(c) if c <= SCAN_LIMIT || book.is_materialized() => ((0..c).collect(), false),
        _ => {
            let mut rng = stream(&[seed, 0xC0DE]);
            ((0..SAMPLED_CODEWORDS).map(|_| book.draw_message(&mut rng)).collect(), true)
        }
    };
    let mut buf = vec![0u8; n];
    for &i in &indices {
        book.codeword_into(i, &mut buf);
        for (pos, &x) in buf.iter().enumerate() {
            counts[pos][x as usize] += 1.0;
        }
    }
    let total = indices.len() as f64;
    for row in &mut counts {
        for c in row.iter_mut() {
            *c /= total;
        }
    }
    (counts, sampled)
}

/// Empirical per-position marginals of each sender's channel inputs.
pub fn position_laws(cb: &CodebookSystem) -> Result<PositionLaws> {
    let n = cb.blocklength();
    let mut sampled = false;
    let mut laws = Vec::with_capacity(cb.num_senders());
    for (m, code) in cb.codes.iter().enumerate() {
        let seed = cb.seed ^ m as u64;
        let rows: Vec<Vec<f64>> = match code {
            SenderCode::Plain { code } => {
                let (r, s) = codebook_marginals(code, seed);
                sampled |= s;
                r
            }
            SenderCode::Split { a, b } => {
                let (ra, sa) = codebook_marginals(a, seed);
                let (rb, sb) = codebook_marginals(b, seed ^ 1);
                sampled |= sa || sb;
                ra.iter()
                    .zip(&rb)
                    .map(|(x, y)| {
                        Ok(max_law(
                            &Distribution::normalized(x.clone())?,
                            &Distribution::normalized(y.clone())?,
                        ))
                    })
                    .collect::<Result<_>>()?
            }
            SenderCode::Interleaved { even, odd } => {
                let (re, se) = codebook_marginals(even, seed);
                let (ro, so) = codebook_marginals(odd, seed ^ 1);
                sampled |= se || so;
                (0..n).map(|i| if i % 2 == 0 { re[i / 2].clone() } else { ro[i / 2].clone() }).collect()
            }
        };
        laws.push(rows.into_iter().map(Distribution::normalized).collect::<Result<Vec<_>>>()?);
    }
    Ok(PositionLaws { laws, sampled })
}

/// Weights of the position tuples `(q + d_m mod n)_m`, with `q` uniform.
#[derive(Debug, Clone)]
enum TupleLaw {
    Exact(Vec<(Vec<usize>, f64)>),
    /// Too many cells: stratified samples per `q`.
    Sampled(Vec<Vec<Vec<usize>>>),
}

fn tuple_law(n: usize, ds: &DelaySystem, k: usize, seed: u64) -> Result<TupleLaw> {
    ds.validate(n)?;
    if ds.num_senders() != k {
        return Err(AmacError::ShapeMismatch(format!(
            "delay system has {} senders, codes {k}",
            ds.num_senders()
        )));
    }
    let support_size = ds.support_size(n);
    let ops = support_size.saturating_mul(n as u128);
    let tuples_bound = (n as u128).saturating_pow(k as u32).min(ops);
    if ops <= ENUMERATION_OPS && tuples_bound <= EXACT_CELL_CAP as u128 {
        let support = ds.support(n)?;
        let dense = (n as u128).pow(k as u32) <= 4_000_000;
        let key = |t: &[usize]| t.iter().rev().fold(0usize, |acc, &x| acc * n + x);
        let mut dense_w = if dense { vec![0.0f64; n.pow(k as u32)] } else { Vec::new() };
        let mut sparse: HashMap<usize, f64> = HashMap::new();
        let mut tuple = vec![0usize; k];
        for (d, p) in &support {
            let w = p / n as f64;
            for q in 0..n {
                for m in 0..k {
                    tuple[m] = (q + d[m]) % n;
                }
                let i = key(&tuple);
                if dense {
                    dense_w[i] += w;
                } else {
                    *sparse.entry(i).or_insert(0.0) += w;
                }
            }
        }
        let decode = |mut i: usize| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let x = i % n;
                    i /= n;
                    x
                })
                .collect()
        };
        let mut cells: Vec<(Vec<usize>, f64)> = if dense {
            dense_w.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, &w)| (decode(i), w)).collect()
        } else {
            let mut v: Vec<_> = sparse.into_iter().map(|(i, w)| (decode(i), w)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        cells.shrink_to_fit();
        return Ok(TupleLaw::Exact(cells));
    }
    let per_q = (EXACT_CELL_CAP / n).max(2);
    let strata = (0..n)
        .map(|q| {
            let mut rng = stream(&[seed, 0x5A3F, q as u64]);
            (0..per_q)
                .map(|_| {
                    let d = ds.sample(n, &mut rng)?;
                    Ok(d.iter().map(|&x| (q + x) % n).collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TupleLaw::Sampled(strata))
}

/// CMI of every non-empty subset (in `SenderSet` index order) for one
/// product input law.
fn subset_values(w: &DmcChannel, marginals: &[Vec<f64>], subsets: &[SenderSet]) -> Result<Vec<f64>> {
    let mut joint = vec![1.0];
    for m in marginals {
        joint = joint.iter().flat_map(|&a| m.iter().map(move |&b| a * b)).collect();
    }
    let js = JointSystem::from_input_law(w, joint)?;
    subsets.iter().map(|&s| js.conditional_mutual_information(s)).collect()
}

/// One subset's bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    /// 1-based sender list.
    pub senders: Vec<usize>,
    pub value: f64,
    /// Standard error when subsampled, else 0.
    pub standard_error: f64,
    /// Rate `R(S)` of the coding system.
    pub rate: f64,
}

/// Converse bounds for one coding system and delay system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBoundReport {
    pub n: usize,
    pub delay_system: String,
    pub values: Vec<SubsetValue>,
    /// Whether every `(q, d)` cell was enumerated.
    pub exact: bool,
    /// Position tuples evaluated.
    pub cells: usize,
    /// Whether some codebook marginals came from sampled codewords.
    pub sampled_codewords: bool,
    /// Error probability used in `epsilon_n`, if any.
    pub error_estimate: Option<f64>,
    /// `R([K]) P_e + 1/n`; without an error estimate only `1/n` is known.
    pub epsilon_n: f64,
}

impl EmpiricalBoundReport {
    pub fn value(&self, s: SenderSet) -> Option<f64> {
        let m: Vec<usize> = s.iter().map(|i| i + 1).collect();
        self.values.iter().find(|v| v.senders == m).map(|v| v.value)
    }

    /// Largest `R(S) - v(S) - epsilon_n` over subsets.
    pub fn worst_slack(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.rate - v.value - self.epsilon_n)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub const CSV_HEADER: &'static str = "subset,value,standard_error,rate,epsilon_n,rate_minus_bound";

    pub fn csv_rows(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|v| {
                let s: Vec<String> = v.senders.iter().map(|m| m.to_string()).collect();
                format!(
                    "{},{},{},{},{},{}",
                    s.join(" "),
                    v.value,
                    v.standard_error,
                    v.rate,
                    self.epsilon_n,
                    v.rate - v.value - self.epsilon_n
                )
            })
            .collect()
    }
}

/// Evaluates `v(S)` for every non-empty `S`.
pub fn empirical_bound_report(
    w: &DmcChannel,
    cb: &CodebookSystem,
    ds: &DelaySystem,
    error_estimate: Option<f64>,
) -> Result<EmpiricalBoundReport> {
    let k = cb.num_senders();
    if w.num_senders() != k {
        return Err(AmacError::ShapeMismatch(format!("channel has {} senders, codes {k}", w.num_senders())));
    }
    let laws = position_laws(cb)?;
    let subsets: Vec<SenderSet> = SenderSet::all_nonempty(k).collect();
    let (means, errs, exact, cells) = average_over_tuples(w, &laws, &tuple_law(laws.n(), ds, k, cb.seed)?, &subsets)?;
    let rates = cb.rates();
    let total_rate: f64 = rates.iter().sum();
    let values = subsets
        .iter()
        .enumerate()
        .map(|(i, &s)| SubsetValue {
            senders: s.iter().map(|m| m + 1).collect(),
            value: means[i],
            standard_error: errs[i],
            rate: s.iter().map(|m| rates[m]).sum(),
        })
        .collect();
    let n = laws.n();
    Ok(EmpiricalBoundReport {
        n,
        delay_system: ds.name(),
        values,
        exact,
        cells,
        sampled_codewords: laws.sampled,
        error_estimate,
        epsilon_n: total_rate * error_estimate.unwrap_or(0.0) + 1.0 / n as f64,
    })
}

/// `v(S)` in bits.
pub fn empirical_bound(w: &DmcChannel, cb: &CodebookSystem, ds: &DelaySystem, s: SenderSet) -> Result<f64> {
    if s.is_empty() {
        return Err(AmacError::EmptySubset);
    }
    let laws = position_laws(cb)?;
    let k = cb.num_senders();
    let (v, _, _, _) = average_over_tuples(w, &laws, &tuple_law(laws.n(), ds, k, cb.seed)?, &[s])?;
    Ok(v[0])
}

type Averages = (Vec<f64>, Vec<f64>, bool, usize);

fn average_over_tuples(w: &DmcChannel, laws: &PositionLaws, tl: &TupleLaw, subsets: &[SenderSet]) -> Result<Averages> {
    match tl {
        TupleLaw::Exact(cells) => {
            let parts: Vec<Vec<f64>> = cells
                .par_iter()
                .map(|(t, wgt)| Ok(subset_values(w, &laws.product(t), subsets)?.into_iter().map(|v| v * wgt).collect()))
                .collect::<Result<_>>()?;
            let mut sums = vec![0.0; subsets.len()];
            for p in &parts {
                for (s, v) in sums.iter_mut().zip(p) {
                    *s += v;
                }
            }
            Ok((sums, vec![0.0; subsets.len()], true, cells.len()))
        }
        TupleLaw::Sampled(strata) => {
            let n = strata.len() as f64;
            let per: Vec<(Vec<f64>, Vec<f64>)> = strata
                .par_iter()
                .map(|samples| {
                    let mut s1 = vec![0.0; subsets.len()];
                    let mut s2 = vec![0.0; subsets.len()];
                    for t in samples {
                        for (i, v) in subset_values(w, &laws.product(t), subsets)?.into_iter().enumerate() {
                            s1[i] += v;
                            s2[i] += v * v;
                        }
                    }
                    let m = samples.len() as f64;
                    let mean: Vec<f64> = s1.iter().map(|x| x / m).collect();
                    let var: Vec<f64> = s2
                        .iter()
                        .zip(&mean)
                        .map(|(x, mu)| ((x / m - mu * mu) * m / (m - 1.0)).max(0.0) / m)
                        .collect();
                    Ok((mean, var))
                })
                .collect::<Result<_>>()?;
            let mut mean = vec![0.0; subsets.len()];
            let mut var = vec![0.0; subsets.len()];
            for (mu, v) in &per {
                for i in 0..subsets.len() {
                    mean[i] += mu[i] / n;
                    var[i] += v[i] / (n * n);
                }
            }
            let cells = strata.iter().map(Vec::len).sum();
            Ok((mean, var.into_iter().map(f64::sqrt).collect(), false, cells))
        }
    }
}

/// Two-sender form in terms of the relative delay `D = D_1 - D_2 (mod n)`:
/// positions `(q, q - d)` with `q` uniform and `d ~ relative`.
pub fn relative_delay_bound(w: &DmcChannel, cb: &CodebookSystem, relative: &[f64], s: SenderSet) -> Result<f64> {
    if cb.num_senders() != 2 || w.num_senders() != 2 {
        return Err(AmacError::Unsupported("the relative-delay form needs exactly 2 senders".into()));
    }
    if s.is_empty() {
        return Err(AmacError::EmptySubset);
    }
    let n = cb.blocklength();
    if relative.len() != n {
        return Err(AmacError::DimensionMismatch { expected: n, got: relative.len() });
    }
    let laws = position_laws(cb)?;
    let cells: Vec<(Vec<usize>, f64)> = (0..n)
        .flat_map(|q| {
            relative
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(move |(d, &p)| (vec![q, (q + n - d) % n], p / n as f64))
        })
        .collect();
    let (v, _, _, _) = average_over_tuples(w, &laws, &TupleLaw::Exact(cells), &[s])?;
    Ok(v[0])
}

/// Law of `D_1 - D_2 (mod n)` for a two-sender delay system.
pub fn relative_delay_law(ds: &DelaySystem, n: usize) -> Result<Vec<f64>> {
    if ds.num_senders() != 2 {
        return Err(AmacError::Unsupported("relative delay needs exactly 2 senders".into()));
    }
    let mut out = vec![0.0; n];
    for (d, p) in ds.support(n)? {
        out[(d[0] + n - d[1]) % n] += p;
    }
    Ok(out)
}

/// Same bound with the delay dropped from the conditioning: at each `q`
/// the input law is the delay mixture of the product laws.
pub fn delay_marginalized_bound(w: &DmcChannel, cb: &CodebookSystem, ds: &DelaySystem, s: SenderSet) -> Result<f64> {
    let laws = position_laws(cb)?;
    let n = laws.n();
    let k = laws.num_senders();
    let support = ds.support(n)?;
    let sizes = w.input_sizes().to_vec();
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|q| {
            let mut joint = vec![0.0; sizes.iter().product()];
            for (d, p) in &support {
                let pos: Vec<usize> = (0..k).map(|m| (q + d[m]) % n).collect();
                let mut prod = vec![1.0];
                for m in laws.product(&pos) {
                    prod = prod.iter().flat_map(|&a| m.iter().map(move |&b| a * b)).collect();
                }
                for (j, v) in joint.iter_mut().zip(prod) {
                    *j += p * v;
                }
            }
            JointSystem::from_input_law(w, joint)?.conditional_mutual_information(s)
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / n as f64)
}

/// Total-variation distance between the law of `(X_{m, Q+D_m})_m` and the
/// product of its marginals.
pub fn position_independence_tv(cb: &CodebookSystem, ds: &DelaySystem) -> Result<f64> {
    let laws = position_laws(cb)?;
    let n = laws.n();
    let k = laws.num_senders();
    let TupleLaw::Exact(cells) = tuple_law(n, ds, k, cb.seed)? else {
        return Err(AmacError::Capacity("delay support too large for an exact independence check".into()));
    };
    let sizes: Vec<usize> = laws.laws.iter().map(|l| l[0].len()).collect();
    let mut joint = vec![0.0; sizes.iter().product()];
    for (t, wgt) in &cells {
        let mut prod = vec![1.0];
        for m in laws.product(t) {
            prod = prod.iter().flat_map(|&a| m.iter().map(move |&b| a * b)).collect();
        }
        for (j, v) in joint.iter_mut().zip(prod) {
            *j += wgt * v;
        }
    }
    let mut marg: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut tuple = vec![0usize; k];
    for (i, &p) in joint.iter().enumerate() {
        crate::infocore::tuple_of(&sizes, i, &mut tuple);
        for m in 0..k {
            marg[m][tuple[m]] += p;
        }
    }
    Ok(joint
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            crate::infocore::tuple_of(&sizes, i, &mut tuple);
            let q: f64 = (0..k).map(|m| marg[m][tuple[m]]).product();
            (p - q).abs()
        })
        .sum::<f64>()
        / 2.0)
}

/// Uniform relative-delay law on `values`.
pub fn uniform_relative_law(n: usize, values: impl IntoIterator<Item = usize>) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let vals: Vec<usize> = values.into_iter().filter(|&v| v < n).collect();
    for &v in &vals {
        out[v] += 1.0 / vals.len() as f64;
    }
    out
}
