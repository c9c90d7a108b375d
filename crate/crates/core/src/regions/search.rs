use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    decompose_on_face, polytope, raise_to_face, ComboPolytope, Ordering, RatePolytope, RateVector,
    SubsetBounds,
};
use crate::error::{AmacError, Result};
use crate::infocore::{Distribution, DmcChannel, ProductInput, SenderSet};

/// Effort limits for the witness searches.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Grid step is `1/grid_resolution` per simplex coordinate.
    pub grid_resolution: usize,
    /// The resolution is lowered until the product grid fits.
    pub max_grid_points: usize,
    /// Best grid points handed to Nelder-Mead.
    pub refine_starts: usize,
    pub refine_iters: usize,
    /// Resolution of the polytope grids used for combinations.
    pub pair_resolution: usize,
    /// Resolution of the shared third-sender grid (partly asynchronous).
    pub third_resolution: usize,
    pub tol: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            grid_resolution: 16,
            max_grid_points: 200_000,
            refine_starts: 4,
            refine_iters: 400,
            pair_resolution: 8,
            third_resolution: 8,
            tol: 1e-6,
        }
    }
}

/// Why a point belongs to a region.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionCertificate {
    /// `r` lies in `R[W; witness]`.
    Single { witness: ProductInput },
    /// `r` is dominated by `sum_i weights[i] * points[i]`, each point on the
    /// dominant face of `R[W; components[i]]`.
    Combination {
        components: Vec<ProductInput>,
        weights: Vec<f64>,
        points: Vec<RateVector>,
    },
}

impl RegionCertificate {
    pub fn num_components(&self) -> usize {
        match self {
            RegionCertificate::Single { .. } => 1,
            RegionCertificate::Combination { components, .. } => components.len(),
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn simplex_points(size: usize, res: usize) -> Vec<Distribution> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut counts = Vec::new();
    rec(res, size, &mut Vec::new(), &mut counts);
    counts
        .into_iter()
        .map(|c| {
            Distribution::normalized(c.into_iter().map(|v| v as f64).collect())
                .expect("composition is a distribution")
        })
        .collect()
}

fn grid_size(sizes: &[usize], res: usize) -> usize {
    sizes
        .iter()
        .map(|&a| binom(res + a - 1, a - 1))
        .fold(1usize, |acc, c| acc.saturating_mul(c))
}

/// Product distributions whose marginals have coordinates on the
/// `1/res` lattice, for the largest `res <= resolution` that fits
/// `max_points`. First sender varies slowest.
pub fn product_grid(sizes: &[usize], resolution: usize, max_points: usize) -> Vec<ProductInput> {
    let mut res = resolution.max(1);
    while res > 1 && grid_size(sizes, res) > max_points {
        res -= 1;
    }
    let axes: Vec<Vec<Distribution>> = sizes.iter().map(|&a| simplex_points(a, res)).collect();
    let mut out = vec![Vec::<Distribution>::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for d in axis {
                let mut p = prefix.clone();
                p.push(d.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(ProductInput::new).collect()
}

fn grid_polytopes(w: &DmcChannel, grid: Vec<ProductInput>) -> Result<Vec<RatePolytope>> {
    grid.into_par_iter().map(|p| polytope(w, &p)).collect()
}

/// Maps unconstrained parameters to a product distribution (softmax per
/// sender, last logit pinned at zero).
fn softmax_input(sizes: &[usize], theta: &[f64]) -> ProductInput {
    let mut off = 0;
    let marginals = sizes
        .iter()
        .map(|&a| {
            let mut logits: Vec<f64> = theta[off..off + a - 1].to_vec();
            logits.push(0.0);
            off += a - 1;
            let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
            Distribution::normalized(e).expect("softmax weights are positive")
        })
        .collect();
    ProductInput::new(marginals)
}

fn logits_of(p: &ProductInput) -> Vec<f64> {
    let mut out = Vec::new();
    for d in p.marginals() {
        let probs = d.probs();
        let last = (probs[probs.len() - 1] + 1e-9).ln();
        out.extend(probs[..probs.len() - 1].iter().map(|q| (q + 1e-9).ln() - last));
    }
    out
}

/// Plain Nelder-Mead minimizer; stops early once `f <= stop`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    iters: usize,
    stop: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f(x0));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= stop || (simplex[n].1 - simplex[0].1).abs() < 1e-14 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = lerp(&centroid, &worst, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = lerp(&centroid, &worst, 0.5);
            let fc = f(&xc);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &item.0, 0.5);
                    let fx = f(&x);
                    *item = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Smallest violation of `r` over the searched product distributions,
/// with the distribution attaining it. Non-positive (up to `tol`) means `r`
/// was found inside `C`.
pub fn union_exclusion_margin(
    w: &DmcChannel,
    r: &RateVector,
    budget: &SearchBudget,
) -> Result<(f64, ProductInput)> {
    let k = w.num_senders();
    if r.dim() != k {
        return Err(AmacError::DimensionMismatch {
            expected: k,
            got: r.dim(),
        });
    }
    let sizes = w.input_sizes().to_vec();
    let grid = product_grid(&sizes, budget.grid_resolution, budget.max_grid_points);
    let scored: Vec<f64> = grid
        .par_iter()
        .map(|p| polytope(w, p).map(|poly| poly.violation(r)))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| scored[a].total_cmp(&scored[b]).then(a.cmp(&b)));
    let best = order[0];
    if scored[best] <= budget.tol {
        return Ok((scored[best], grid[best].clone()));
    }
    let objective = |theta: &[f64]| {
        polytope(w, &softmax_input(&sizes, theta))
            .map(|poly| poly.violation(r))
            .unwrap_or(f64::INFINITY)
    };
    let refined: Vec<(f64, ProductInput)> = order
        .iter()
        .take(budget.refine_starts)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| {
            let (x, fx) = nelder_mead(
                objective,
                &logits_of(&grid[i]),
                0.5,
                budget.refine_iters,
                budget.tol,
            );
            (fx, softmax_input(&sizes, &x))
        })
        .collect();
    let mut out = (scored[best], grid[best].clone());
    for (fx, p) in refined {
        if fx < out.0 {
            out = (fx, p);
        }
    }
    Ok(out)
}

/// Searches for a product distribution `p` with `r` in `R[W; p]`.
/// `None` means "not found at this budget", not a proof of exclusion.
pub fn union_contains(
    w: &DmcChannel,
    r: &RateVector,
    budget: &SearchBudget,
) -> Result<Option<ProductInput>> {
    let (margin, p) = union_exclusion_margin(w, r, budget)?;
    Ok((margin <= budget.tol).then_some(p))
}

/// Largest grid sum-rate bound `max_p b_p([K])` and its maximizer.
pub fn max_sum_rate_bound(w: &DmcChannel, budget: &SearchBudget) -> Result<(f64, ProductInput)> {
    let grid = product_grid(w.input_sizes(), budget.grid_resolution, budget.max_grid_points);
    let polys = grid_polytopes(w, grid)?;
    let (best, poly) = polys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.sum_bound().total_cmp(&b.1.sum_bound()).then(b.0.cmp(&a.0)))
        .ok_or_else(|| AmacError::Numerical("empty grid".into()))?;
    let _ = best;
    Ok((poly.sum_bound(), poly.input().expect("grid polytope").clone()))
}

fn combination_certificate(
    comps: &[&RatePolytope],
    weights: &[f64],
    r: &RateVector,
    tol: f64,
) -> Result<RegionCertificate> {
    let owned: Vec<RatePolytope> = comps.iter().map(|c| (*c).clone()).collect();
    let combo = ComboPolytope::new(owned.clone(), weights.to_vec())?;
    let z = raise_to_face(&combo, r, SenderSet::EMPTY);
    let points = decompose_on_face(&owned, weights, &z, None, tol.max(1e-9))?;
    Ok(RegionCertificate::Combination {
        components: owned
            .iter()
            .map(|c| c.input().cloned().ok_or(AmacError::MissingProvenance))
            .collect::<Result<_>>()?,
        weights: weights.to_vec(),
        points,
    })
}

fn fits_half_pair(a: &RatePolytope, b: &RatePolytope, r: &RateVector, tol: f64) -> bool {
    SenderSet::all_nonempty(a.num_senders())
        .all(|s| r.subset_sum(s) <= 0.5 * (a.bound(s) + b.bound(s)) + tol)
}

/// Membership in the even-delay capacity region: points of `C` and
/// midpoints (weights 1/2, 1/2) of two points of `C`.
pub fn even_delay_region_contains(
    w: &DmcChannel,
    r: &RateVector,
    budget: &SearchBudget,
) -> Result<(bool, Option<RegionCertificate>)> {
    if w.num_senders() != 2 {
        return Err(AmacError::Unsupported(format!(
            "even-delay region needs 2 senders, channel has {}",
            w.num_senders()
        )));
    }
    if let Some(witness) = union_contains(w, r, budget)? {
        return Ok((true, Some(RegionCertificate::Single { witness })));
    }
    let grid = product_grid(w.input_sizes(), budget.pair_resolution, budget.max_grid_points);
    let polys = grid_polytopes(w, grid)?;
    let n = polys.len();
    let hit = (0..n).into_par_iter().find_map_first(|i| {
        (i..n)
            .find(|&j| fits_half_pair(&polys[i], &polys[j], r, budget.tol))
            .map(|j| (i, j))
    });
    match hit {
        None => Ok((false, None)),
        Some((i, j)) => {
            let cert = combination_certificate(&[&polys[i], &polys[j]], &[0.5, 0.5], r, budget.tol)?;
            Ok((true, Some(cert)))
        }
    }
}

/// Feasible `alpha` in `[0, 1]` with `r <= alpha b_i + (1 - alpha) b_j`.
pub(crate) fn pair_weight(a: &RatePolytope, b: &RatePolytope, r: &RateVector, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for s in SenderSet::all_nonempty(a.num_senders()) {
        let d = a.bound(s) - b.bound(s);
        let c = r.subset_sum(s) - b.bound(s) - tol;
        if d.abs() < 1e-15 {
            if c > 0.0 {
                return None;
            }
        } else if d > 0.0 {
            lo = lo.max(c / d);
        } else {
            hi = hi.min(c / d);
        }
        if lo > hi {
            return None;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Feasible `(alpha_1, alpha_2, alpha_3)` for a three-way combination, found
/// by enumerating vertices of the 2-D feasibility polygon.
pub(crate) fn triple_weights(
    comps: [&RatePolytope; 3],
    r: &RateVector,
    tol: f64,
) -> Option<[f64; 3]> {
    let [p1, p2, p3] = comps;
    let mut cons: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, -1.0, -1.0)];
    for s in SenderSet::all_nonempty(p1.num_senders()) {
        let b3 = p3.bound(s);
        cons.push((p1.bound(s) - b3, p2.bound(s) - b3, r.subset_sum(s) - b3 - tol));
    }
    let ok = |x: f64, y: f64| cons.iter().all(|(a, b, c)| a * x + b * y >= c - 1e-12);
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a1, b1, c1) = cons[i];
            let (a2, b2, c2) = cons[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            if ok(x, y) {
                let x = x.clamp(0.0, 1.0);
                let y = y.clamp(0.0, 1.0 - x);
                return Some([x, y, 1.0 - x - y]);
            }
        }
    }
    None
}

/// Membership in the partly asynchronous 3-sender region: combinations of
/// at most three points from polytopes sharing the third sender's input law.
pub fn partly_async_region_contains(
    w: &DmcChannel,
    r: &RateVector,
    budget: &SearchBudget,
) -> Result<(bool, Option<RegionCertificate>)> {
    if w.num_senders() != 3 {
        return Err(AmacError::Unsupported(format!(
            "partly asynchronous region needs 3 senders, channel has {}",
            w.num_senders()
        )));
    }
    if r.dim() != 3 {
        return Err(AmacError::DimensionMismatch {
            expected: 3,
            got: r.dim(),
        });
    }
    let sizes = w.input_sizes();
    let tol = budget.tol;
    let thirds = product_grid(&sizes[2..], budget.third_resolution, budget.max_grid_points);
    let pairs = product_grid(&sizes[..2], budget.pair_resolution, budget.max_grid_points);
    for third in thirds {
        let grid: Vec<ProductInput> = pairs
            .iter()
            .map(|p| ProductInput::new(vec![p.marginal(0).clone(), p.marginal(1).clone(), third.marginal(0).clone()]))
            .collect();
        let polys = grid_polytopes(w, grid)?;
        if let Some(p) = polys.iter().find(|p| p.violation(r) <= tol) {
            let witness = p.input().expect("grid polytope").clone();
            return Ok((true, Some(RegionCertificate::Single { witness })));
        }
        let n = polys.len();
        // cheap necessary condition: the total must fit under the best sum bound
        let best_sum = polys.iter().map(|p| p.sum_bound()).fold(0.0, f64::max);
        if r.total() > best_sum + tol {
            continue;
        }
        let pair = (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| pair_weight(&polys[i], &polys[j], r, tol).map(|a| (i, j, a)))
        });
        if let Some((i, j, a)) = pair {
            let cert = combination_certificate(&[&polys[i], &polys[j]], &[a, 1.0 - a], r, tol)?;
            return Ok((true, Some(cert)));
        }
        let triple = (0..n).into_par_iter().find_map_first(|i| {
            for j in i + 1..n {
                for l in j + 1..n {
                    let cs = [&polys[i], &polys[j], &polys[l]];
                    if cs.iter().all(|c| c.sum_bound() < r.total() - tol) {
                        continue;
                    }
                    if let Some(wts) = triple_weights(cs, r, tol) {
                        return Some((i, j, l, wts));
                    }
                }
            }
            None
        });
        if let Some((i, j, l, wts)) = triple {
            let cert = combination_certificate(&[&polys[i], &polys[j], &polys[l]], &wts, r, tol)?;
            return Ok((true, Some(cert)));
        }
    }
    Ok((false, None))
}

/// Two polytope vertices whose midpoint lies outside the searched union.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MidpointConstruction {
    pub p: ProductInput,
    pub p_prime: ProductInput,
    pub v: RateVector,
    pub v_prime: RateVector,
    pub midpoint: RateVector,
    /// Smallest union violation of the midpoint over the refined search.
    pub margin: f64,
}

/// Looks over vertex pairs of grid polytopes for the midpoint that is
/// furthest outside the union `C`.
pub fn find_out_of_union_midpoint(w: &DmcChannel, budget: &SearchBudget) -> Result<MidpointConstruction> {
    if w.num_senders() != 2 {
        return Err(AmacError::Unsupported("midpoint search needs 2 senders".into()));
    }
    let pair_grid = product_grid(w.input_sizes(), budget.pair_resolution, budget.max_grid_points);
    let pair_polys = grid_polytopes(w, pair_grid)?;
    let union_grid = product_grid(w.input_sizes(), budget.grid_resolution, budget.max_grid_points);
    let union_polys = grid_polytopes(w, union_grid)?;

    let mut verts: Vec<(usize, RateVector)> = Vec::new();
    for (i, p) in pair_polys.iter().enumerate() {
        for o in Ordering::all(2) {
            let v = p.vertex_from_bounds(&o);
            if !verts.iter().any(|(_, u)| u == &v) {
                verts.push((i, v));
            }
        }
    }
    let coarse_margin = |m: &RateVector| {
        union_polys
            .iter()
            .map(|p| p.violation(m))
            .fold(f64::INFINITY, f64::min)
    };
    let nv = verts.len();
    let best = (0..nv)
        .into_par_iter()
        .map(|a| {
            let mut local: Option<(f64, usize, usize)> = None;
            for b in a + 1..nv {
                let m = RateVector::combine(&[verts[a].1.clone(), verts[b].1.clone()], &[0.5, 0.5]);
                let g = coarse_margin(&m);
                if local.map_or(true, |(lg, _, _)| g > lg) {
                    local = Some((g, a, b));
                }
            }
            local
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, usize, usize)>, |acc, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        })
        .ok_or_else(|| AmacError::Numerical("no vertex pairs".into()))?;
    let (_, a, b) = best;
    let (ia, va) = verts[a].clone();
    let (ib, vb) = verts[b].clone();
    let midpoint = RateVector::combine(&[va.clone(), vb.clone()], &[0.5, 0.5]);
    let (margin, _) = union_exclusion_margin(w, &midpoint, budget)?;
    Ok(MidpointConstruction {
        p: pair_polys[ia].input().expect("grid polytope").clone(),
        p_prime: pair_polys[ib].input().expect("grid polytope").clone(),
        v: va,
        v_prime: vb,
        midpoint,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;

    #[test]
    fn grid_shapes() {
        assert_eq!(product_grid(&[2, 2], 16, 1_000_000).len(), 17 * 17);
        assert_eq!(product_grid(&[3], 4, 1_000_000).len(), 15);
        let small = product_grid(&[2, 2], 16, 100);
        assert!(small.len() <= 100);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, fx) = nelder_mead(|v| (v[0] - 1.0).powi(2) + (v[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 500, 0.0);
        assert!(fx < 1e-8);
        assert!((x[0] - 1.0).abs() < 1e-3 && (x[1] + 2.0).abs() < 1e-3);
    }

    #[test]
    fn union_examples() {
        let w = channels::example4();
        let budget = SearchBudget::default();
        assert!(union_contains(&w, &RateVector::zeros(2), &budget).unwrap().is_some());
        let r = RateVector::new(vec![0.352_217, 0.352_217]).unwrap();
        let p = union_contains(&w, &r, &budget).unwrap().unwrap();
        assert!(polytope(&w, &p).unwrap().violation(&r) <= 1e-6);
        let far = RateVector::new(vec![0.9, 0.9]).unwrap();
        assert!(union_contains(&w, &far, &budget).unwrap().is_none());
    }

    #[test]
    fn pair_weight_interval() {
        let a = RatePolytope::from_bounds(2, vec![1.0, 0.0, 1.0]).unwrap();
        let b = RatePolytope::from_bounds(2, vec![0.0, 1.0, 1.0]).unwrap();
        let r = RateVector::new(vec![0.3, 0.6]).unwrap();
        let alpha = pair_weight(&a, &b, &r, 0.0).unwrap();
        assert!((0.3..=0.4).contains(&alpha));
        let r = RateVector::new(vec![0.5, 0.6]).unwrap();
        assert!(pair_weight(&a, &b, &r, 0.0).is_none());
    }

    #[test]
    fn triple_weights_corners() {
        let e = |i: usize| {
            let mut b = vec![0.0; 7];
            for s in 1..8usize {
                if s & (1 << i) != 0 {
                    b[s - 1] = 1.0;
                }
            }
            RatePolytope::from_bounds(3, b).unwrap()
        };
        let (a, b, c) = (e(0), e(1), e(2));
        let r = RateVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let wts = triple_weights([&a, &b, &c], &r, 1e-12).unwrap();
        assert!((wts[0] - 0.2).abs() < 1e-9 && (wts[1] - 0.3).abs() < 1e-9);
        let r = RateVector::new(vec![0.4, 0.4, 0.4]).unwrap();
        assert!(triple_weights([&a, &b, &c], &r, 1e-12).is_none());
    }
}
