//! Weighted least-squares fit of the exponential model.
//!
//! Objective: `sum_k n_k (g_k - gamma(h_k))^2 / gamma(h_k)^2` (Cressie
//! weights). A coarse grid over (nugget, sill, range) seeds a Nelder-Mead
//! refinement. Bin values are normalised by their maximum first, so
//! scaling every bin by a constant scales nugget and sill by the same
//! constant and leaves the range untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::variogram::{EmpiricalVariogram, VariogramModel};

/// Relative parameter step at which the refinement stops.
pub const PARAM_TOL: f64 = 1e-6;
const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramFit {
    pub model: VariogramModel,
    /// Set for an all-zero variogram; the model is then nugget-only with
    /// zero sill and `range = max_lag`.
    pub degenerate: bool,
    /// Weighted residual at the optimum, in normalised units.
    pub objective: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    lags: &'a [f64],
    gammas: Vec<f64>,
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn model(p: &[f64; 3]) -> (f64, f64, f64) {
        (p[0].abs(), p[1].abs(), p[2].exp())
    }

    fn cost(&self, p: &[f64; 3]) -> f64 {
        let (nugget, sill, range) = Self::model(p);
        let mut total = 0.0;
        for ((h, g), w) in self.lags.iter().zip(&self.gammas).zip(&self.weights) {
            let m = nugget + sill * (1.0 - (-3.0 * h / range).exp());
            if m <= 1e-300 {
                return f64::INFINITY;
            }
            total += w * ((g - m) / m).powi(2);
        }
        total
    }
}

pub fn fit_exponential(ev: &EmpiricalVariogram) -> Result<VariogramFit> {
    if ev.bins.len() < 3 {
        return Err(Error::Insufficient {
            what: "variogram bins for fitting",
            needed: 3,
            got: ev.bins.len(),
        });
    }
    let scale = ev.bins.iter().map(|b| b.gamma).fold(0.0, f64::max);
    if scale <= 0.0 {
        return Ok(VariogramFit {
            model: VariogramModel::exponential(0.0, 0.0, ev.max_lag)?,
            degenerate: true,
            objective: 0.0,
            iterations: 0,
        });
    }
    let lags: Vec<f64> = ev.bins.iter().map(|b| b.lag).collect();
    let problem = Problem {
        lags: &lags,
        gammas: ev.bins.iter().map(|b| b.gamma / scale).collect(),
        weights: ev.bins.iter().map(|b| b.pairs as f64).collect(),
    };

    let h_min = lags.iter().copied().fold(f64::INFINITY, f64::min).max(1e-9);
    let h_max = lags.iter().copied().fold(0.0, f64::max).max(h_min);
    let seed = grid_seed(&problem, h_min, h_max);
    let (mut best, mut iterations) = nelder_mead(|p| problem.cost(p), seed);
    // restart from the optimum until it stops moving
    for _ in 0..5 {
        let (next, it) = nelder_mead(|p| problem.cost(p), best);
        iterations += it;
        let moved = relative_step(&best, &next);
        best = next;
        if moved < PARAM_TOL {
            break;
        }
    }
    let (nugget, sill, range) = Problem::model(&best);
    if !range.is_finite() || range <= 0.0 {
        return Err(Error::Numerical("variogram range diverged".into()));
    }
    Ok(VariogramFit {
        model: VariogramModel::exponential(nugget * scale, sill * scale, range)?,
        degenerate: false,
        objective: problem.cost(&best),
        iterations,
    })
}

fn grid_seed(problem: &Problem, h_min: f64, h_max: f64) -> [f64; 3] {
    let lo = (0.25 * h_min).ln();
    let hi = (4.0 * h_max).ln();
    let n_range = 40;
    let nugget_frac = [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let total = [0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0, 3.0];
    let mut best = ([0.1, 1.0, h_max.ln()], f64::INFINITY);
    for i in 0..n_range {
        let lr = lo + (hi - lo) * i as f64 / (n_range - 1) as f64;
        for f in nugget_frac {
            for c in total {
                let p = [f * c, (1.0 - f) * c, lr];
                let cost = problem.cost(&p);
                if cost < best.1 {
                    best = (p, cost);
                }
            }
        }
    }
    best.0
}

fn relative_step(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-12))
        .fold(0.0, f64::max)
}

fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(f: F, start: [f64; 3]) -> ([f64; 3], usize) {
    let mut simplex = [start; 4];
    for i in 0..3 {
        let step = if start[i].abs() > 1e-8 {
            0.1 * start[i].abs()
        } else {
            0.05
        };
        simplex[i + 1][i] += step;
    }
    let mut values: Vec<f64> = simplex.iter().map(&f).collect();

    let mut iter = 0;
    while iter < MAX_ITER {
        iter += 1;
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        let v = order.map(|i| values[i]);
        values = v.to_vec();

        let spread = (1..4)
            .map(|i| relative_step(&simplex[0], &simplex[i]))
            .fold(0.0, f64::max);
        if spread < PARAM_TOL * 1e-4 {
            break;
        }

        let mut centroid = [0.0; 3];
        for p in &simplex[..3] {
            for j in 0..3 {
                centroid[j] += p[j] / 3.0;
            }
        }
        let along = |t: f64| -> [f64; 3] {
            let mut q = [0.0; 3];
            for j in 0..3 {
                q[j] = centroid[j] + t * (simplex[3][j] - centroid[j]);
            }
            q
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[3] = expanded;
                values[3] = fe;
            } else {
                simplex[3] = reflected;
                values[3] = fr;
            }
        } else if fr < values[2] {
            simplex[3] = reflected;
            values[3] = fr;
        } else {
            let contracted = if fr < values[3] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[3].min(fr) {
                simplex[3] = contracted;
                values[3] = fc;
            } else {
                let best = simplex[0];
                for i in 1..4 {
                    for (v, b) in simplex[i].iter_mut().zip(best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..4)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[best], iter)
}
