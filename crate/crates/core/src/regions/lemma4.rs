use serde::{Deserialize, Serialize};

use super::{
    decompose_on_face, dominant_face_contains, proper_subsets_lex, raise_to_face, ComboPolytope,
    EdgeType, RatePolytope, RateVector, SubsetBounds,
};
use crate::error::{AmacError, Result};
use crate::infocore::SenderSet;

const MAX_STEPS: usize = 10_000;
const SHIFT_TOL: f64 = 1e-7;

/// Output of [`dominate_on_common_edges`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommonEdgeDomination {
    pub weights: Vec<f64>,
    pub points: Vec<RateVector>,
    pub edge: EdgeType,
    /// Bisection steps spent shifting weight.
    pub steps: usize,
}

fn common_tight(components: &[RatePolytope], points: &[RateVector], tol: f64) -> Option<SenderSet> {
    let k = components[0].num_senders();
    proper_subsets_lex(k).into_iter().find(|&s| {
        components
            .iter()
            .zip(points)
            .all(|(c, x)| (x.subset_sum(s) - c.bound(s)).abs() <= tol)
    })
}

fn tight_set<P: SubsetBounds>(p: &P, x: &RateVector, tol: f64) -> Option<SenderSet> {
    proper_subsets_lex(p.num_senders())
        .into_iter()
        .find(|&s| x.subset_sum(s) >= p.bound(s) - tol)
}

/// Replaces points `x_i` on the dominant faces of `components` (combined
/// with `weights`) by points on edges of one common type whose combination,
/// possibly with shifted weights, dominates the original combination.
///
/// While the combination is interior to the combined dominant face, weight
/// moves from the lowest face to the highest (towards the first active
/// component when heights tie) as far as the combined region still holds
/// the target; then the target is raised onto the combined face and split
/// along orderings that start with the tight set.
pub fn dominate_on_common_edges(
    components: &[RatePolytope],
    points: &[RateVector],
    weights: &[f64],
    tol: f64,
) -> Result<CommonEdgeDomination> {
    if components.is_empty() || components.len() != points.len() || points.len() != weights.len() {
        return Err(AmacError::InvalidParameter(
            "components, points and weights must have equal non-zero length".into(),
        ));
    }
    let k = components[0].num_senders();
    if !(2..=4).contains(&k) {
        return Err(AmacError::Unsupported(format!("{k} senders")));
    }
    for (i, (c, x)) in components.iter().zip(points).enumerate() {
        if !dominant_face_contains(c, x, tol)? {
            return Err(AmacError::InvalidParameter(format!(
                "point {i} is not on its polytope's dominant face"
            )));
        }
    }
    if let Some(s) = common_tight(components, points, tol) {
        return Ok(CommonEdgeDomination {
            weights: weights.to_vec(),
            points: points.to_vec(),
            edge: EdgeType::new(s, k)?,
            steps: 0,
        });
    }

    let x = RateVector::combine(points, weights);
    let mut alpha = weights.to_vec();
    let mut steps = 0usize;
    loop {
        let combo = ComboPolytope::new(components.to_vec(), alpha.clone())?;
        if tight_set(&combo, &x, tol).is_some() {
            return finish(components, &x, alpha, tol, steps, k);
        }

        let active: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0).collect();
        let height = |i: usize| components[i].sum_bound();
        let lo_i = *active
            .iter()
            .min_by(|&&a, &&b| height(a).total_cmp(&height(b)))
            .expect("weights sum to one");
        let hi_i = *active
            .iter()
            .max_by(|&&a, &&b| height(a).total_cmp(&height(b)).then(b.cmp(&a)))
            .expect("weights sum to one");
        let shifted: Box<dyn Fn(f64) -> Vec<f64>> = if height(hi_i) - height(lo_i) > tol {
            let base = alpha.clone();
            let t_max = base[lo_i];
            Box::new(move |t: f64| {
                let mut a = base.clone();
                let moved = t * t_max;
                a[lo_i] -= moved;
                a[hi_i] += moved;
                a
            })
        } else {
            let base = alpha.clone();
            let target = active[0];
            Box::new(move |t: f64| {
                let mut a: Vec<f64> = base.iter().map(|v| v * (1.0 - t)).collect();
                a[target] += t;
                a
            })
        };
        let holds = |a: &[f64]| -> Result<bool> {
            let c = ComboPolytope::new(components.to_vec(), normalize(a))?;
            Ok(c.violation(&x) <= tol)
        };
        let end = normalize(&shifted(1.0));
        if holds(&end)? {
            if end == alpha {
                return Err(AmacError::Numerical("weight shift made no progress".into()));
            }
            alpha = end;
            steps += 1;
        } else {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            while hi - lo > SHIFT_TOL * 1e-6 {
                steps += 1;
                if steps > MAX_STEPS {
                    return Err(AmacError::Numerical(format!(
                        "weight shifting stalled after {MAX_STEPS} steps"
                    )));
                }
                let mid = 0.5 * (lo + hi);
                if holds(&shifted(mid))? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            alpha = normalize(&shifted(lo));
            let combo = ComboPolytope::new(components.to_vec(), alpha.clone())?;
            if tight_set(&combo, &x, SHIFT_TOL.max(tol)).is_none() {
                return Err(AmacError::Numerical(
                    "weight shift ended without a tight subset".into(),
                ));
            }
            return finish(components, &x, alpha, SHIFT_TOL.max(tol), steps, k);
        }
        if steps > MAX_STEPS {
            return Err(AmacError::Numerical(format!(
                "weight shifting stalled after {MAX_STEPS} steps"
            )));
        }
    }
}

fn finish(
    components: &[RatePolytope],
    x: &RateVector,
    alpha: Vec<f64>,
    tol: f64,
    steps: usize,
    k: usize,
) -> Result<CommonEdgeDomination> {
    let combo = ComboPolytope::new(components.to_vec(), alpha.clone())?;
    let s = tight_set(&combo, x, tol).expect("checked by caller");
    // any greedy raise dominates x and keeps S tight since z(S) >= x(S)
    let z = raise_to_face(&combo, x, SenderSet::EMPTY);
    let pts = decompose_on_face(components, &alpha, &z, Some(s), 1e-6)?;
    Ok(CommonEdgeDomination {
        weights: alpha,
        points: pts,
        edge: EdgeType::new(s, k)?,
        steps,
    })
}

fn normalize(a: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = a.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    clipped.into_iter().map(|v| v / total).collect()
}
