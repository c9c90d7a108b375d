//! Rate regions: the subset-bound polytopes `R[W; p]`, their dominant faces
//! and vertices, weighted combinations of several polytopes, and searches
//! over product input distributions for the union `C` and the delay-model
//! specific regions built from it.

mod lemma4;
mod plot;
mod search;

pub use lemma4::{dominate_on_common_edges, CommonEdgeDomination};
pub use plot::{emit_region_plot_data, RegionKind, RegionPlot};
pub use search::{
    even_delay_region_contains, find_out_of_union_midpoint, max_sum_rate_bound,
    partly_async_region_contains, product_grid, union_contains, union_exclusion_margin,
    MidpointConstruction, RegionCertificate, SearchBudget,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{AmacError, Result};
use crate::infocore::{DmcChannel, JointSystem, ProductInput, SenderSet};

/// Default tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// Non-negative rate tuple in bits per symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < -1e-12) {
            return Err(AmacError::InvalidParameter(format!(
                "rate {r} is negative or not finite"
            )));
        }
        Ok(RateVector(rates.into_iter().map(|r| r.max(0.0)).collect()))
    }

    pub fn zeros(k: usize) -> Self {
        RateVector(vec![0.0; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `R(S)`, the sum of the coordinates in `S`.
    pub fn subset_sum(&self, s: SenderSet) -> f64 {
        s.iter().map(|m| self.0[m]).sum()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> RateVector {
        RateVector(self.0.iter().map(|r| r * c).collect())
    }

    pub fn dominates(&self, other: &RateVector, tol: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a >= *b - tol)
    }

    /// Weighted sum of equally sized vectors.
    pub fn combine(points: &[RateVector], weights: &[f64]) -> RateVector {
        let k = points.first().map_or(0, RateVector::dim);
        let mut out = vec![0.0; k];
        for (p, &w) in points.iter().zip(weights) {
            for (o, v) in out.iter_mut().zip(&p.0) {
                *o += w * v;
            }
        }
        RateVector(out)
    }
}

impl std::ops::Index<usize> for RateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A decoding order: a permutation of the senders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let k = order.len();
        let mut seen = vec![false; k];
        for &m in &order {
            if m >= k || seen[m] {
                return Err(AmacError::InvalidParameter(format!(
                    "{order:?} is not a permutation of 0..{k}"
                )));
            }
            seen[m] = true;
        }
        Ok(Ordering(order))
    }

    pub fn identity(k: usize) -> Self {
        Ordering((0..k).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every ordering of `k` senders, in lexicographic order.
    pub fn all(k: usize) -> Vec<Ordering> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Ordering>) {
            if prefix.len() == used.len() {
                out.push(Ordering(prefix.clone()));
                return;
            }
            for m in 0..used.len() {
                if !used[m] {
                    used[m] = true;
                    prefix.push(m);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[m] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; k], &mut out);
        out
    }

    /// True when the first `|s|` senders of the order are exactly `s`.
    pub fn has_prefix_set(&self, s: SenderSet) -> bool {
        SenderSet::from_senders(&self.0[..s.len()]) == s
    }
}

/// Anything described by subset bounds `R(S) <= bound(S)` on the
/// non-negative orthant.
pub trait SubsetBounds {
    fn num_senders(&self) -> usize;
    fn bound(&self, s: SenderSet) -> f64;

    fn sum_bound(&self) -> f64 {
        self.bound(SenderSet::full(self.num_senders()))
    }

    /// Largest violation `max_S R(S) - bound(S)`, counting negative coordinates.
    fn violation(&self, r: &RateVector) -> f64 {
        let k = self.num_senders();
        let mut worst = r.as_slice().iter().fold(f64::NEG_INFINITY, |a, &x| a.max(-x));
        for s in SenderSet::all_nonempty(k) {
            worst = worst.max(r.subset_sum(s) - self.bound(s));
        }
        worst
    }

    /// Vertex of the dominant face for `order`, read off the bounds:
    /// coordinate `order[i]` is `bound({order[i..]}) - bound({order[i+1..]})`.
    fn vertex_from_bounds(&self, order: &Ordering) -> RateVector {
        let k = self.num_senders();
        let mut out = vec![0.0; k];
        let pi = order.as_slice();
        for i in 0..k {
            let tail = SenderSet::from_senders(&pi[i..]);
            let rest = SenderSet::from_senders(&pi[i + 1..]);
            let lower = if rest.is_empty() { 0.0 } else { self.bound(rest) };
            out[pi[i]] = (self.bound(tail) - lower).max(0.0);
        }
        RateVector(out)
    }
}

fn check_dim(expected: usize, r: &RateVector) -> Result<()> {
    if r.dim() != expected {
        return Err(AmacError::DimensionMismatch {
            expected,
            got: r.dim(),
        });
    }
    Ok(())
}

/// `R(S) <= bound(S) + tol` for every `S`, and no coordinate below `-tol`.
pub fn contains<P: SubsetBounds + ?Sized>(p: &P, r: &RateVector, tol: f64) -> Result<bool> {
    check_dim(p.num_senders(), r)?;
    Ok(p.violation(r) <= tol)
}

pub fn dominant_face_contains<P: SubsetBounds + ?Sized>(
    p: &P,
    r: &RateVector,
    tol: f64,
) -> Result<bool> {
    Ok(contains(p, r, tol)? && (r.total() - p.sum_bound()).abs() <= tol)
}

/// Extra subset tight at a dominant-face point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeType(SenderSet);

impl EdgeType {
    pub fn new(s: SenderSet, k: usize) -> Result<Self> {
        if s.is_empty() || s == SenderSet::full(k) || !s.is_subset_of(SenderSet::full(k)) {
            return Err(AmacError::InvalidParameter(format!(
                "edge type {s} must be a proper non-empty subset of {k} senders"
            )));
        }
        Ok(EdgeType(s))
    }

    pub fn set(self) -> SenderSet {
        self.0
    }
}

impl std::fmt::Display for EdgeType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Proper subsets of `[k]` in lexicographic order of their sorted members.
pub fn proper_subsets_lex(k: usize) -> Vec<SenderSet> {
    let mut sets: Vec<SenderSet> = SenderSet::all_nonempty(k)
        .filter(|s| *s != SenderSet::full(k))
        .collect();
    sets.sort_by_key(|s| s.members());
    sets
}

/// Lexicographically smallest proper subset tight at `r`, or `None` when `r`
/// lies in the relative interior of the dominant face.
pub fn edge_type<P: SubsetBounds + ?Sized>(
    p: &P,
    r: &RateVector,
    tol: f64,
) -> Result<Option<EdgeType>> {
    if !dominant_face_contains(p, r, tol)? {
        return Err(AmacError::NotOnDominantFace {
            gap: p.sum_bound() - r.total(),
        });
    }
    let k = p.num_senders();
    Ok(proper_subsets_lex(k)
        .into_iter()
        .find(|&s| (r.subset_sum(s) - p.bound(s)).abs() <= tol)
        .map(EdgeType))
}

/// The polytope `R[W; p]` of rate tuples with `R(S) <= I(X_S ; Y | X_{S^c})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatePolytope {
    k: usize,
    bounds: Vec<f64>,
    #[serde(skip)]
    provenance: Option<Box<(DmcChannel, ProductInput)>>,
}

impl RatePolytope {
    /// Polytope from raw bounds indexed by `S.index()`; carries no provenance.
    pub fn from_bounds(k: usize, bounds: Vec<f64>) -> Result<Self> {
        if bounds.len() != (1 << k) - 1 {
            return Err(AmacError::ShapeMismatch(format!(
                "{k} senders need {} bounds, got {}",
                (1 << k) - 1,
                bounds.len()
            )));
        }
        Ok(RatePolytope {
            k,
            bounds,
            provenance: None,
        })
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn provenance(&self) -> Option<(&DmcChannel, &ProductInput)> {
        self.provenance.as_deref().map(|(w, p)| (w, p))
    }

    pub fn input(&self) -> Option<&ProductInput> {
        self.provenance.as_deref().map(|(_, p)| p)
    }

    /// Monotone and submodular within `tol`, with non-negative bounds.
    pub fn is_polymatroid(&self, tol: f64) -> bool {
        let all: Vec<SenderSet> = SenderSet::all_nonempty(self.k).collect();
        let b = |s: SenderSet| if s.is_empty() { 0.0 } else { self.bound(s) };
        all.iter().all(|&s| b(s) >= -tol)
            && all.iter().all(|&s| {
                all.iter().all(|&t| {
                    let mono = !s.is_subset_of(t) || b(s) <= b(t) + tol;
                    let sub = b(s) + b(t) >= b(s.union(t)) + b(s.intersection(t)) - tol;
                    mono && sub
                })
            })
    }
}

impl SubsetBounds for RatePolytope {
    fn num_senders(&self) -> usize {
        self.k
    }

    fn bound(&self, s: SenderSet) -> f64 {
        self.bounds[s.index()]
    }
}

/// Computes every subset bound of `R[W; p]`.
pub fn polytope(w: &DmcChannel, p: &ProductInput) -> Result<RatePolytope> {
    let js = JointSystem::new(w, p)?;
    let k = w.num_senders();
    let bounds = SenderSet::all_nonempty(k)
        .map(|s| js.conditional_mutual_information(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatePolytope {
        k,
        bounds,
        provenance: Some(Box::new((w.clone(), p.clone()))),
    })
}

/// Dominant-face vertex for `order`: coordinate `order[i]` receives
/// `I(X_{order[i]} ; Y | X_{order[..i]})`, evaluated from the joint law.
pub fn vertex(p: &RatePolytope, order: &Ordering) -> Result<RateVector> {
    let (w, input) = p.provenance().ok_or(AmacError::MissingProvenance)?;
    if order.len() != p.k {
        return Err(AmacError::DimensionMismatch {
            expected: p.k,
            got: order.len(),
        });
    }
    let js = JointSystem::new(w, input)?;
    let mut out = vec![0.0; p.k];
    let mut decoded = SenderSet::EMPTY;
    let mut h_prev = js.conditional_output_entropy(decoded);
    for &m in order.as_slice() {
        decoded = decoded.with(m);
        let h_next = js.conditional_output_entropy(decoded);
        out[m] = (h_prev - h_next).max(0.0);
        h_prev = h_next;
    }
    Ok(RateVector(out))
}

/// Convex combination `sum_i alpha_i R_i` of polytopes on the same senders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComboPolytope {
    components: Vec<RatePolytope>,
    weights: Vec<f64>,
    bounds: Vec<f64>,
}

impl ComboPolytope {
    pub fn new(components: Vec<RatePolytope>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(AmacError::InvalidParameter(
                "need one weight per component and at least one component".into(),
            ));
        }
        let k = components[0].k;
        if components.iter().any(|c| c.k != k) {
            return Err(AmacError::ShapeMismatch(
                "components have different numbers of senders".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(AmacError::InvalidParameter(format!(
                "weights must be non-negative and sum to 1 (sum {total})"
            )));
        }
        let bounds = (0..(1 << k) - 1)
            .map(|i| {
                components
                    .iter()
                    .zip(&weights)
                    .map(|(c, a)| a * c.bounds[i])
                    .sum()
            })
            .collect();
        Ok(ComboPolytope {
            components,
            weights,
            bounds,
        })
    }

    pub fn components(&self) -> &[RatePolytope] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn as_polytope(&self) -> RatePolytope {
        RatePolytope {
            k: self.components[0].k,
            bounds: self.bounds.clone(),
            provenance: None,
        }
    }
}

impl SubsetBounds for ComboPolytope {
    fn num_senders(&self) -> usize {
        self.components[0].k
    }

    fn bound(&self, s: SenderSet) -> f64 {
        self.bounds[s.index()]
    }
}

/// Builds `R(alpha_1..alpha_k)` from channel/input pairs.
pub fn combo_polytope(parts: &[(DmcChannel, ProductInput)], weights: &[f64]) -> Result<ComboPolytope> {
    let comps = parts
        .iter()
        .map(|(w, p)| polytope(w, p))
        .collect::<Result<Vec<_>>>()?;
    ComboPolytope::new(comps, weights.to_vec())
}

/// Raises `r` (inside the region) coordinate by coordinate, skipping `fixed`,
/// until it reaches the dominant face. Returns the raised point.
pub fn raise_to_face<P: SubsetBounds + ?Sized>(p: &P, r: &RateVector, fixed: SenderSet) -> RateVector {
    let k = p.num_senders();
    let mut z = r.0.clone();
    for e in 0..k {
        if fixed.contains(e) {
            continue;
        }
        let zr = RateVector(z.clone());
        let slack = SenderSet::all_nonempty(k)
            .filter(|s| s.contains(e))
            .map(|s| p.bound(s) - zr.subset_sum(s))
            .fold(f64::INFINITY, f64::min);
        if slack > 0.0 {
            z[e] += slack;
        }
    }
    RateVector(z)
}

/// Writes a dominant-face point `z` of `sum_i alpha_i R_i` as
/// `sum_i alpha_i y_i` with each `y_i` on the dominant face of component `i`.
///
/// The decomposition goes through the combined vertices: `z` is expressed as
/// a convex combination of `sum_i alpha_i v_i(pi)` over orderings `pi`, and
/// the same coefficients are applied per component. With `prefix = Some(S)`
/// only orderings starting with `S` are used, so every `y_i` is tight on `S`.
pub fn decompose_on_face(
    components: &[RatePolytope],
    weights: &[f64],
    z: &RateVector,
    prefix: Option<SenderSet>,
    tol: f64,
) -> Result<Vec<RateVector>> {
    let k = z.dim();
    if components.iter().any(|c| c.k != k) {
        return Err(AmacError::DimensionMismatch {
            expected: k,
            got: components[0].k,
        });
    }
    if k > 4 {
        return Err(AmacError::Unsupported(
            "face decomposition supports at most 4 senders".into(),
        ));
    }
    let orders: Vec<Ordering> = Ordering::all(k)
        .into_iter()
        .filter(|o| prefix.map_or(true, |s| o.has_prefix_set(s)))
        .collect();
    let per_comp: Vec<Vec<RateVector>> = components
        .iter()
        .map(|c| orders.iter().map(|o| c.vertex_from_bounds(o)).collect())
        .collect();
    let combined: Vec<RateVector> = (0..orders.len())
        .map(|j| {
            let pts: Vec<RateVector> = per_comp.iter().map(|v| v[j].clone()).collect();
            RateVector::combine(&pts, weights)
        })
        .collect();
    let lambdas = convex_coefficients(&combined, z, tol).ok_or_else(|| {
        AmacError::Numerical(format!(
            "point {:?} is not a convex combination of the face vertices",
            z.as_slice()
        ))
    })?;
    Ok(per_comp
        .iter()
        .map(|verts| RateVector::combine(verts, &lambdas))
        .collect())
}

/// Finds non-negative coefficients summing to one with `sum_j c_j v_j = z`,
/// trying supports of at most `dim` points (Caratheodory).
fn convex_coefficients(points: &[RateVector], z: &RateVector, tol: f64) -> Option<Vec<f64>> {
    let m = points.len();
    let dim = z.dim();
    let max_support = dim.min(m);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for size in 1..=max_support {
        for subset in combinations(m, size) {
            let a = DMatrix::from_fn(dim + 1, size, |r, c| {
                if r < dim {
                    points[subset[c]][r]
                } else {
                    1.0
                }
            });
            let b = DVector::from_fn(dim + 1, |r, _| if r < dim { z[r] } else { 1.0 });
            let svd = a.clone().svd(true, true);
            let Ok(sol) = svd.solve(&b, 1e-14) else {
                continue;
            };
            if sol.iter().any(|c| *c < -1e-9) {
                continue;
            }
            let resid = (&a * &sol - &b).amax();
            if resid <= tol {
                let mut coeffs = vec![0.0; m];
                for (c, &j) in subset.iter().enumerate() {
                    coeffs[j] = sol[c].max(0.0);
                }
                let total: f64 = coeffs.iter().sum();
                coeffs.iter_mut().for_each(|c| *c /= total);
                if best.as_ref().map_or(true, |(r, _)| resid < *r) {
                    best = Some((resid, coeffs));
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, c)| c)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use crate::infocore::{binary_entropy, Distribution};
    use approx::assert_abs_diff_eq;

    fn ex4() -> RatePolytope {
        polytope(&channels::example4(), &ProductInput::uniform(&[2, 2])).unwrap()
    }

    #[test]
    fn polytope_examples() {
        let p = ex4();
        assert_abs_diff_eq!(p.bound(SenderSet(1)), 0.655_639, epsilon = 1e-6);
        assert_abs_diff_eq!(p.bound(SenderSet(2)), 0.655_639, epsilon = 1e-6);
        assert_abs_diff_eq!(p.bound(SenderSet(3)), 0.704_434, epsilon = 1e-6);

        let p = polytope(&channels::tuple_output(&[2, 2]), &ProductInput::uniform(&[2, 2])).unwrap();
        assert_abs_diff_eq!(p.bound(SenderSet(1)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.bound(SenderSet(3)), 2.0, epsilon = 1e-12);

        let p = polytope(&channels::bsc(0.1).unwrap(), &ProductInput::uniform(&[2])).unwrap();
        assert_abs_diff_eq!(p.bound(SenderSet(1)), 1.0 - binary_entropy(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(p.bound(SenderSet(1)), 0.531_004, epsilon = 1e-6);

        let bad = ProductInput::uniform(&[2, 3]);
        assert!(polytope(&channels::example4(), &bad).is_err());
    }

    #[test]
    fn contains_examples() {
        let p = ex4();
        assert!(contains(&p, &RateVector::zeros(2), MEMBERSHIP_TOL).unwrap());
        let r = RateVector::new(vec![0.66, 0.66]).unwrap();
        assert!(!contains(&p, &r, MEMBERSHIP_TOL).unwrap());
        let r = RateVector::new(vec![0.352, 0.352]).unwrap();
        assert!(contains(&p, &r, MEMBERSHIP_TOL).unwrap());
        let r3 = RateVector::zeros(3);
        assert!(contains(&p, &r3, MEMBERSHIP_TOL).is_err());
    }

    #[test]
    fn vertex_examples() {
        let p = ex4();
        let v = vertex(&p, &Ordering::new(vec![0, 1]).unwrap()).unwrap();
        assert_abs_diff_eq!(v[0], 0.048_795, epsilon = 1e-6);
        assert_abs_diff_eq!(v[1], 0.655_639, epsilon = 1e-6);
        assert_abs_diff_eq!(v.total(), 0.704_434, epsilon = 1e-6);
        let v2 = vertex(&p, &Ordering::new(vec![1, 0]).unwrap()).unwrap();
        assert_abs_diff_eq!(v2[0], v[1], epsilon = 1e-12);
        assert_abs_diff_eq!(v2[1], v[0], epsilon = 1e-12);

        let single = polytope(&channels::bsc(0.1).unwrap(), &ProductInput::uniform(&[2])).unwrap();
        let v = vertex(&single, &Ordering::identity(1)).unwrap();
        assert_abs_diff_eq!(v[0], single.bound(SenderSet(1)), epsilon = 1e-12);

        let bare = RatePolytope::from_bounds(2, p.bounds().to_vec()).unwrap();
        assert!(matches!(
            vertex(&bare, &Ordering::identity(2)),
            Err(AmacError::MissingProvenance)
        ));
    }

    #[test]
    fn dominant_face_examples() {
        let p = ex4();
        for o in Ordering::all(2) {
            let v = vertex(&p, &o).unwrap();
            assert!(dominant_face_contains(&p, &v, 1e-9).unwrap());
        }
        assert!(!dominant_face_contains(&p, &RateVector::zeros(2), MEMBERSHIP_TOL).unwrap());
        let mid = RateVector::new(vec![0.352_217, 0.352_217]).unwrap();
        assert!(dominant_face_contains(&p, &mid, MEMBERSHIP_TOL).unwrap());
    }

    #[test]
    fn edge_type_examples() {
        let p = ex4();
        let v = vertex(&p, &Ordering::new(vec![0, 1]).unwrap()).unwrap();
        // R_2 = b({2}) is tight; R_1 = I(X1;Y) < b({1})
        assert!((v[0] - p.bound(SenderSet(1))).abs() > 1e-3);
        let t = edge_type(&p, &v, 1e-9).unwrap().unwrap();
        assert_eq!(t.set(), SenderSet(0b10));

        let interior = RateVector::new(vec![0.3, p.sum_bound() - 0.3]).unwrap();
        assert_eq!(edge_type(&p, &interior, 1e-9).unwrap(), None);

        assert!(edge_type(&p, &RateVector::zeros(2), 1e-9).is_err());
    }

    #[test]
    fn edge_type_three_senders() {
        let w = channels::binary_adder(3);
        let input = ProductInput::new(vec![
            Distribution::bernoulli(0.5).unwrap(),
            Distribution::bernoulli(0.3).unwrap(),
            Distribution::bernoulli(0.6).unwrap(),
        ]);
        let p = polytope(&w, &input).unwrap();
        // midpoint of the edge between orderings (2,1,3) and (2,3,1): tight on {1,3}
        let a = vertex(&p, &Ordering::new(vec![1, 0, 2]).unwrap()).unwrap();
        let b = vertex(&p, &Ordering::new(vec![1, 2, 0]).unwrap()).unwrap();
        let mid = RateVector::combine(&[a, b], &[0.5, 0.5]);
        let t = edge_type(&p, &mid, 1e-9).unwrap().unwrap();
        assert_eq!(t.set(), SenderSet::from_senders(&[0, 2]));
    }

    #[test]
    fn combo_examples() {
        let w = channels::example4();
        let u = ProductInput::uniform(&[2, 2]);
        let skew = ProductInput::new(vec![
            Distribution::new(vec![0.9, 0.1]).unwrap(),
            Distribution::uniform(2),
        ]);
        let single = combo_polytope(&[(w.clone(), u.clone())], &[1.0]).unwrap();
        assert_eq!(single.as_polytope().bounds(), ex4().bounds());

        let twin = combo_polytope(&[(w.clone(), u.clone()), (w.clone(), u.clone())], &[0.5, 0.5]).unwrap();
        for (a, b) in twin.as_polytope().bounds().iter().zip(ex4().bounds()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }

        let mixed = combo_polytope(&[(w.clone(), u.clone()), (w.clone(), skew.clone())], &[0.5, 0.5]).unwrap();
        let ps = polytope(&w, &skew).unwrap();
        for s in SenderSet::all_nonempty(2) {
            let want = 0.5 * ex4().bound(s) + 0.5 * ps.bound(s);
            assert_abs_diff_eq!(mixed.bound(s), want, epsilon = 1e-15);
        }

        let bsc = channels::bsc(0.1).unwrap();
        assert!(combo_polytope(&[(w, u), (bsc, ProductInput::uniform(&[2]))], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn degenerate_vertices_are_fine() {
        // sender 2 never influences the output
        let w = DmcChannel::from_fn(vec![2, 2], 2, |x| {
            if x[0] == 0 {
                vec![0.9, 0.1]
            } else {
                vec![0.1, 0.9]
            }
        })
        .unwrap();
        let p = polytope(&w, &ProductInput::uniform(&[2, 2])).unwrap();
        let a = vertex(&p, &Ordering::new(vec![0, 1]).unwrap()).unwrap();
        let b = vertex(&p, &Ordering::new(vec![1, 0]).unwrap()).unwrap();
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], 0.0, epsilon = 1e-12);
        assert_eq!(edge_type(&p, &a, 1e-9).unwrap().unwrap().set(), SenderSet(1));
    }

    #[test]
    fn decomposition_reproduces_point() {
        let w = channels::example4();
        let p1 = polytope(&w, &ProductInput::uniform(&[2, 2])).unwrap();
        let p2 = polytope(
            &w,
            &ProductInput::new(vec![Distribution::bernoulli(0.2).unwrap(), Distribution::bernoulli(0.7).unwrap()]),
        )
        .unwrap();
        let combo = ComboPolytope::new(vec![p1.clone(), p2.clone()], vec![0.4, 0.6]).unwrap();
        let v0 = combo.vertex_from_bounds(&Ordering::identity(2));
        let v1 = combo.vertex_from_bounds(&Ordering::new(vec![1, 0]).unwrap());
        let z = RateVector::combine(&[v0, v1], &[0.3, 0.7]);
        let parts = decompose_on_face(&[p1.clone(), p2.clone()], &[0.4, 0.6], &z, None, 1e-9).unwrap();
        assert!(dominant_face_contains(&p1, &parts[0], 1e-9).unwrap());
        assert!(dominant_face_contains(&p2, &parts[1], 1e-9).unwrap());
        let back = RateVector::combine(&parts, &[0.4, 0.6]);
        for i in 0..2 {
            assert_abs_diff_eq!(back[i], z[i], epsilon = 1e-9);
        }
    }
}
