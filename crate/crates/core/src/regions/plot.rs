use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::product_grid;
use super::{
    partly_async_region_contains, polytope, Ordering, RateVector, RegionCertificate, SearchBudget,
    SubsetBounds,
};
use crate::error::{AmacError, Result};
use crate::infocore::{DmcChannel, ProductInput, SenderSet};

/// Which region to trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Polytope { input: ProductInput },
    Union,
    EvenDelay,
    PartlyAsync,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::Polytope { .. } => "polytope",
            RegionKind::Union => "union",
            RegionKind::EvenDelay => "even_delay",
            RegionKind::PartlyAsync => "partly_async",
        }
    }
}

/// Boundary samples plus the certificates backing them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionPlot {
    pub region: String,
    pub senders: usize,
    pub rows: Vec<PlotRow>,
    pub certificates: Vec<RegionCertificate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotRow {
    pub rates: Vec<f64>,
    pub member: bool,
    /// Index into `certificates`, when one backs the row.
    pub certificate: Option<usize>,
}

impl RegionPlot {
    /// CSV with `#` comment lines for `header`, then `R1..RK,member,certificate`.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        out.push_str(&format!("# region={}\n", self.region));
        for (k, v) in header {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let cols: Vec<String> = (1..=self.senders).map(|i| format!("R{i}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",member,certificate\n");
        for row in &self.rows {
            let rates: Vec<String> = row.rates.iter().map(|r| format!("{r}")).collect();
            out.push_str(&rates.join(","));
            out.push_str(&format!(
                ",{},{}\n",
                u8::from(row.member),
                row.certificate.map(|c| c.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

/// Unit-ish directions in the non-negative orthant.
fn directions(k: usize, resolution: usize) -> Vec<Vec<f64>> {
    let res = resolution.max(2);
    let half_pi = std::f64::consts::FRAC_PI_2;
    match k {
        1 => vec![vec![1.0]],
        2 => (0..res)
            .map(|j| {
                let a = half_pi * j as f64 / (res - 1) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..res {
                let theta = half_pi * i as f64 / (res - 1) as f64;
                for j in 0..res {
                    let phi = half_pi * j as f64 / (res - 1) as f64;
                    let mut d = vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                    d.resize(k, 0.0);
                    out.push(d);
                }
            }
            out
        }
    }
}

fn ray_length<P: SubsetBounds + ?Sized>(p: &P, u: &[f64]) -> f64 {
    SenderSet::all_nonempty(p.num_senders())
        .filter_map(|s| {
            let us: f64 = s.iter().map(|m| u[m]).sum();
            (us > 1e-12).then(|| p.bound(s) / us)
        })
        .fold(f64::INFINITY, f64::min)
}

fn point(u: &[f64], t: f64) -> RateVector {
    RateVector::new(u.iter().map(|x| (x * t).max(0.0)).collect()).expect("non-negative")
}

/// Samples the boundary of a region along a fixed grid of directions.
/// For a single polytope the vertices are appended as extra rows.
pub fn emit_region_plot_data(
    w: &DmcChannel,
    kind: &RegionKind,
    resolution: usize,
    budget: &SearchBudget,
) -> Result<RegionPlot> {
    let k = w.num_senders();
    let dirs = directions(k, resolution);
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    match kind {
        RegionKind::Polytope { input } => {
            let poly = polytope(w, input)?;
            certificates.push(RegionCertificate::Single {
                witness: input.clone(),
            });
            if k == 1 {
                rows.push(PlotRow { rates: vec![0.0], member: true, certificate: Some(0) });
            }
            for u in &dirs {
                let t = ray_length(&poly, u);
                rows.push(PlotRow { rates: point(u, t).into_vec(), member: true, certificate: Some(0) });
            }
            if k > 1 {
                rows.push(PlotRow { rates: vec![0.0; k], member: true, certificate: Some(0) });
                for o in Ordering::all(k) {
                    let v = poly.vertex_from_bounds(&o);
                    rows.push(PlotRow { rates: v.into_vec(), member: true, certificate: Some(0) });
                }
            }
        }
        RegionKind::Union => {
            let grid = product_grid(w.input_sizes(), budget.grid_resolution, budget.max_grid_points);
            let polys = grid
                .par_iter()
                .map(|p| polytope(w, p))
                .collect::<Result<Vec<_>>>()?;
            if k == 1 {
                rows.push(PlotRow { rates: vec![0.0], member: true, certificate: None });
            }
            for u in &dirs {
                let (best, t) = polys
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, ray_length(p, u)))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                certificates.push(RegionCertificate::Single {
                    witness: polys[best].input().expect("grid polytope").clone(),
                });
                rows.push(PlotRow {
                    rates: point(u, t).into_vec(),
                    member: true,
                    certificate: Some(certificates.len() - 1),
                });
            }
        }
        RegionKind::EvenDelay => {
            if k != 2 {
                return Err(AmacError::Unsupported("even-delay plots need 2 senders".into()));
            }
            let grid = product_grid(w.input_sizes(), budget.pair_resolution, budget.max_grid_points);
            let polys = grid
                .par_iter()
                .map(|p| polytope(w, p))
                .collect::<Result<Vec<_>>>()?;
            let n = polys.len();
            for u in &dirs {
                let mut best = (0, 0, f64::NEG_INFINITY);
                for i in 0..n {
                    for j in i..n {
                        let t = SenderSet::all_nonempty(2)
                            .map(|s| {
                                let us: f64 = s.iter().map(|m| u[m]).sum();
                                let b = 0.5 * (polys[i].bound(s) + polys[j].bound(s));
                                if us > 1e-12 { b / us } else { f64::INFINITY }
                            })
                            .fold(f64::INFINITY, f64::min);
                        if t > best.2 {
                            best = (i, j, t);
                        }
                    }
                }
                let (i, j, t) = best;
                let r = point(u, t);
                let cert = if i == j {
                    RegionCertificate::Single { witness: polys[i].input().expect("grid polytope").clone() }
                } else {
                    RegionCertificate::Combination {
                        components: vec![
                            polys[i].input().expect("grid polytope").clone(),
                            polys[j].input().expect("grid polytope").clone(),
                        ],
                        weights: vec![0.5, 0.5],
                        points: Vec::new(),
                    }
                };
                certificates.push(cert);
                rows.push(PlotRow { rates: r.into_vec(), member: true, certificate: Some(certificates.len() - 1) });
            }
        }
        RegionKind::PartlyAsync => {
            if k != 3 {
                return Err(AmacError::Unsupported("partly asynchronous plots need 3 senders".into()));
            }
            // outer bound on each ray: the largest single-polytope ray length
            let grid = product_grid(w.input_sizes(), budget.pair_resolution, budget.max_grid_points);
            let polys = grid
                .par_iter()
                .map(|p| polytope(w, p))
                .collect::<Result<Vec<_>>>()?;
            for u in &dirs {
                let outer = polys.iter().map(|p| ray_length(p, u)).fold(0.0, f64::max);
                let (mut lo, mut hi) = (0.0, outer);
                let mut cert = None;
                for _ in 0..12 {
                    let mid = 0.5 * (lo + hi);
                    let (ok, c) = partly_async_region_contains(w, &point(u, mid), budget)?;
                    if ok {
                        lo = mid;
                        cert = c;
                    } else {
                        hi = mid;
                    }
                }
                let idx = cert.map(|c| {
                    certificates.push(c);
                    certificates.len() - 1
                });
                rows.push(PlotRow { rates: point(u, lo).into_vec(), member: idx.is_some(), certificate: idx });
            }
        }
    }
    Ok(RegionPlot {
        region: kind.name().to_string(),
        senders: k,
        rows,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;

    #[test]
    fn polytope_plot_rows() {
        let w = channels::example4();
        let kind = RegionKind::Polytope { input: ProductInput::uniform(&[2, 2]) };
        let plot = emit_region_plot_data(&w, &kind, 9, &SearchBudget::default()).unwrap();
        assert_eq!(plot.rows.len(), 9 + 2 + 1);
        assert!(plot.rows.iter().any(|r| r.rates.iter().all(|&x| x == 0.0)));
        let poly = polytope(&w, &ProductInput::uniform(&[2, 2])).unwrap();
        for row in &plot.rows {
            let r = RateVector::new(row.rates.clone()).unwrap();
            assert!(poly.violation(&r) <= 1e-9);
        }
        let csv = plot.to_csv(&[("seed".into(), "7".into())]);
        assert!(csv.starts_with("# region=polytope\n# seed=7\nR1,R2,member,certificate\n"));
    }

    #[test]
    fn single_sender_interval() {
        let w = channels::bsc(0.1).unwrap();
        let kind = RegionKind::Polytope { input: ProductInput::uniform(&[2]) };
        let plot = emit_region_plot_data(&w, &kind, 4, &SearchBudget::default()).unwrap();
        assert_eq!(plot.rows.len(), 2);
        assert!((plot.rows[1].rates[0] - 0.531_004).abs() < 1e-6);
    }
}
