//! Linear ε-insensitive support vector regression.
//!
//! The bias is folded into the weight vector through a constant feature, which
//! makes the dual a box-constrained problem over one variable per row,
//!
//! ```text
//! min_β  ½ βᵀQβ − yᵀβ + ε‖β‖₁   subject to −C ≤ βᵢ ≤ C,   Q = X̄X̄ᵀ,
//! ```
//!
//! with `w̄ = Σ βᵢ x̄ᵢ`. It is solved by exact coordinate minimization in a
//! seeded random order each epoch, setting aside coordinates that sit at a
//! bound with a clearly outward gradient and re-checking all of them before
//! declaring convergence.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{target_rows, TargetPolicy};
use crate::dataio::{Covariates, DesignMatrix, FeatureMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrOptions {
    pub epsilon: f64,
    pub cost: f64,
    /// Stop once the largest projected-gradient violation falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seeds the coordinate visiting order.
    pub seed: u64,
}

impl Default for SvrOptions {
    fn default() -> Self {
        SvrOptions {
            epsilon: 0.5,
            cost: 1.0,
            tolerance: 1e-6,
            max_epochs: 50_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrDiagnostics {
    pub epochs: usize,
    pub max_violation: f64,
    pub primal_objective: f64,
    /// Dual value in maximization form; equals the primal at the optimum.
    pub dual_objective: f64,
    /// (primal − dual) / max(1, |primal|).
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epsilon: f64,
    pub cost: f64,
    /// Training rows (positions in the fitted design) on or outside the tube.
    pub support_indices: Vec<usize>,
    pub features: FeatureMap,
    pub diagnostics: SvrDiagnostics,
}

impl SvrModel {
    pub fn column_names(&self) -> Vec<String> {
        self.features.column_names()
    }

    pub fn predict_scaled(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::Argument(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        Ok(self.bias + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }

    pub fn predict(&self, x: &Covariates) -> Result<f64> {
        self.predict_scaled(&self.features.encode_row(x)?)
    }
}

const POLISH_EVERY: usize = 32;
const POLISH_ROUNDS: usize = 16;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected-gradient violation of coordinate `i` with gradient `g` of the
/// smooth part.
fn violation(beta: f64, g: f64, epsilon: f64, cost: f64) -> f64 {
    let gp = g + epsilon;
    let gn = g - epsilon;
    if beta == 0.0 {
        (-gp).max(gn).max(0.0)
    } else if beta >= cost {
        gp.max(0.0)
    } else if beta <= -cost {
        (-gn).max(0.0)
    } else if beta > 0.0 {
        gp.abs()
    } else {
        gn.abs()
    }
}

struct Problem {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    epsilon: f64,
    cost: f64,
}

impl Problem {
    fn max_violation(&self, beta: &[f64], w: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.y)
            .zip(beta)
            .map(|((x, y), &b)| violation(b, dot(w, x) - y, self.epsilon, self.cost))
            .fold(0.0, f64::max)
    }

    /// Exact minimization over the free coordinates with their signs and the
    /// bounded coordinates held fixed, truncated so no coordinate leaves its
    /// box or changes sign. Coordinate sweeps converge slowly when the free
    /// rows are nearly as many as the feature dimension; this step does not.
    /// Returns whether the full Newton step was taken.
    fn polish_free(&self, beta: &mut [f64], w: &mut [f64]) -> bool {
        let free: Vec<usize> = (0..beta.len())
            .filter(|&i| beta[i] != 0.0 && beta[i].abs() < self.cost)
            .collect();
        if free.is_empty() {
            return true;
        }
        let dim = w.len();
        let xf = DMatrix::from_fn(free.len(), dim, |r, c| self.rows[free[r]][c]);
        let grad = DVector::from_iterator(
            free.len(),
            free.iter().map(|&i| {
                let g = dot(w, &self.rows[i]) - self.y[i];
                g + self.epsilon * beta[i].signum()
            }),
        );
        // Q_FF = X_F X_Fᵀ. If the gradient has a component outside its range,
        // the objective falls linearly along that null-space direction, so
        // follow it to the nearest bound. Otherwise take the Newton step
        // (Q_FF)⁺ applied to −grad.
        let svd = xf.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.max();
        let kept: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 1e-10 * smax)
            .collect();
        let mut in_range = DVector::zeros(free.len());
        let mut newton = DVector::zeros(free.len());
        for &k in &kept {
            let uk = u.column(k);
            let c = uk.dot(&grad);
            in_range.axpy(c, &uk, 1.0);
            let s2 = svd.singular_values[k].powi(2);
            newton.axpy(-c / s2, &uk, 1.0);
        }
        let null = &grad - &in_range;
        let along_null = null.norm() > 1e-9 * grad.norm().max(1e-300);
        let d = if along_null { -null } else { newton };

        let mut step = if along_null { f64::INFINITY } else { 1.0f64 };
        for (k, &i) in free.iter().enumerate() {
            let (b, dk) = (beta[i], d[k]);
            let limit = if b > 0.0 {
                if dk > 0.0 { (self.cost - b) / dk } else if dk < 0.0 { -b / dk } else { f64::INFINITY }
            } else if dk < 0.0 {
                (-self.cost - b) / dk
            } else if dk > 0.0 {
                -b / dk
            } else {
                f64::INFINITY
            };
            step = step.min(limit);
        }
        if !(step > 0.0 && step.is_finite()) {
            return false;
        }
        let dw = xf.transpose() * (&d * step);
        for (k, &i) in free.iter().enumerate() {
            let moved = beta[i] + step * d[k];
            // Land exactly on a bound or zero when the step was truncated there.
            beta[i] = if (moved.abs() - self.cost).abs() < 1e-15 * self.cost {
                self.cost.copysign(moved)
            } else if moved.abs() < 1e-15 {
                0.0
            } else {
                moved
            };
        }
        for (wk, dk) in w.iter_mut().zip(dw.iter()) {
            *wk += dk;
        }
        !along_null && step >= 1.0
    }

    fn primal(&self, w: &[f64]) -> f64 {
        let loss: f64 = self
            .rows
            .iter()
            .zip(&self.y)
            .map(|(x, y)| ((y - dot(w, x)).abs() - self.epsilon).max(0.0))
            .sum();
        0.5 * dot(w, w) + self.cost * loss
    }

    fn dual(&self, beta: &[f64], w: &[f64]) -> f64 {
        let linear: f64 = beta
            .iter()
            .zip(&self.y)
            .map(|(b, y)| b * y - self.epsilon * b.abs())
            .sum();
        linear - 0.5 * dot(w, w)
    }
}

pub fn fit_svr(data: &DesignMatrix, epsilon: f64, cost: f64) -> Result<SvrModel> {
    fit_svr_with(
        data,
        &SvrOptions {
            epsilon,
            cost,
            ..SvrOptions::default()
        },
    )
}

/// Fits on the event-observed rows of `data`.
pub fn fit_svr_with(data: &DesignMatrix, options: &SvrOptions) -> Result<SvrModel> {
    let SvrOptions {
        epsilon,
        cost,
        tolerance,
        max_epochs,
        seed,
    } = *options;
    if !(epsilon > 0.0 && epsilon.is_finite() && cost > 0.0 && cost.is_finite()) {
        return Err(Error::Argument(format!(
            "epsilon and cost must be positive and finite (got {epsilon}, {cost})"
        )));
    }
    if tolerance.is_nan() || tolerance <= 0.0 || max_epochs == 0 {
        return Err(Error::Argument("tolerance and epoch cap must be positive".into()));
    }
    let index = target_rows(data, TargetPolicy::EventsOnly);
    if index.len() < 2 {
        return Err(Error::Underdetermined {
            rows: index.len(),
            params: 2,
        });
    }

    let x = data.x();
    let p = data.ncols();
    let problem = Problem {
        rows: index
            .iter()
            .map(|&i| (0..p).map(|j| x[(i, j)]).chain([1.0]).collect())
            .collect(),
        y: index.iter().map(|&i| f64::from(data.times()[i])).collect(),
        epsilon,
        cost,
    };
    let n = problem.rows.len();
    let q_diag: Vec<f64> = problem.rows.iter().map(|r| dot(r, r)).collect();

    let mut beta = vec![0.0; n];
    let mut w = vec![0.0; p + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut active = n;
    // Largest violation seen in the previous sweep; coordinates at a bound
    // whose gradient points outward by more than this are set aside until
    // the final full check.
    let mut shrink_margin = f64::INFINITY;
    // Sweeps left with shrinking disabled. Each failed full check doubles the
    // next grace period, so repeated set-aside/violate cycles cannot stall.
    let mut grace = 0usize;
    let mut next_grace = 8usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epochs = 0;
    let mut final_violation = f64::INFINITY;

    while epochs < max_epochs {
        epochs += 1;
        order[..active].shuffle(&mut rng);
        let mut sweep_violation = 0.0f64;
        let mut s = 0;
        while s < active {
            let i = order[s];
            let xi = &problem.rows[i];
            let g = dot(&w, xi) - problem.y[i];
            let b = beta[i];
            let (gp, gn) = (g + epsilon, g - epsilon);
            let settled = if grace > 0 {
                false
            } else if b == 0.0 {
                gp > shrink_margin && gn < -shrink_margin
            } else if b >= cost {
                gp < -shrink_margin
            } else if b <= -cost {
                gn > shrink_margin
            } else {
                false
            };
            if settled {
                active -= 1;
                order.swap(s, active);
                continue;
            }
            s += 1;
            sweep_violation = sweep_violation.max(violation(b, g, epsilon, cost));

            let h = q_diag[i];
            let d = if gp < h * b {
                -gp / h
            } else if gn > h * b {
                -gn / h
            } else {
                -b
            };
            let updated = (b + d).clamp(-cost, cost);
            let delta = updated - b;
            if delta != 0.0 {
                beta[i] = updated;
                for (wk, xk) in w.iter_mut().zip(xi) {
                    *wk += delta * xk;
                }
            }
        }
        if epochs % POLISH_EVERY == 0 {
            // A truncated step pins one more coordinate; retry on the rest.
            for _ in 0..POLISH_ROUNDS {
                if problem.polish_free(&mut beta, &mut w) {
                    break;
                }
            }
        }
        if sweep_violation < tolerance {
            final_violation = problem.max_violation(&beta, &w);
            if final_violation < tolerance {
                break;
            }
            active = n;
            shrink_margin = f64::INFINITY;
            grace = next_grace;
            next_grace *= 2;
        } else {
            shrink_margin = sweep_violation;
            grace = grace.saturating_sub(1);
        }
    }
    if final_violation.is_nan() || final_violation >= tolerance {
        let violation = problem.max_violation(&beta, &w);
        return Err(Error::SvrConvergence { epochs, violation });
    }

    let primal_objective = problem.primal(&w);
    let dual_objective = problem.dual(&beta, &w);
    let diagnostics = SvrDiagnostics {
        epochs,
        max_violation: final_violation,
        primal_objective,
        dual_objective,
        relative_gap: (primal_objective - dual_objective) / primal_objective.abs().max(1.0),
    };
    log::debug!("svr converged: {diagnostics:?}");

    let support_indices = index
        .iter()
        .zip(&problem.rows)
        .zip(&problem.y)
        .filter(|((_, xr), y)| (*y - dot(&w, xr)).abs() >= epsilon - 1e-9)
        .map(|((&i, _), _)| i)
        .collect();

    let bias = w[p];
    w.truncate(p);
    Ok(SvrModel {
        weights: w,
        bias,
        epsilon,
        cost,
        support_indices,
        features: data.features().clone(),
        diagnostics,
    })
}
