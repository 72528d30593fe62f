use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::baseline::baseline_from_view;
use super::likelihood::{evaluate, Evaluation, Order, SurvivalView};
use super::model::CoxModel;
use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the per-iteration log-likelihood gain.
    pub tolerance: f64,
    pub max_step_halvings: usize,
    /// Relative ridge added to the information matrix when its Cholesky
    /// factorization fails; also the eigenvalue floor for declaring it singular.
    pub ridge_jitter: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            tolerance: 1e-9,
            max_step_halvings: 20,
            ridge_jitter: 1e-8,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations > 0
            && self.max_step_halvings > 0
            && self.tolerance > 0.0
            && self.tolerance.is_finite()
            && self.ridge_jitter > 0.0
            && self.ridge_jitter.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("fit options must all be positive: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub log_likelihood: f64,
    pub gradient_max_norm: f64,
    /// Square roots of the diagonal of the inverse information at β̂, on the
    /// fitted basis.
    pub standard_errors: Vec<f64>,
}

fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Declares the information matrix singular when the smallest eigenvalue of
/// its correlation form is at or below `floor`, naming the columns that load
/// on that eigenvector.
fn check_rank(info: &DMatrix<f64>, names: &[String], floor: f64) -> Result<()> {
    let p = info.nrows();
    let diag: Vec<f64> = (0..p).map(|k| info[(k, k)]).collect();
    let degenerate: Vec<String> = diag
        .iter()
        .enumerate()
        .filter(|(_, &d)| !(d > 0.0 && d.is_finite()))
        .map(|(k, _)| names[k].clone())
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::RankDeficient { columns: degenerate });
    }
    let corr = DMatrix::from_fn(p, p, |i, j| info[(i, j)] / (diag[i] * diag[j]).sqrt());
    let eig = SymmetricEigen::new(corr);
    let (k_min, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("p ≥ 1");
    if lambda > floor {
        return Ok(());
    }
    let v = eig.eigenvectors.column(k_min);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let columns = v
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() >= 0.25 * vmax)
        .map(|(k, _)| names[k].clone())
        .collect();
    Err(Error::RankDeficient { columns })
}

/// Solves `info · δ = g`, retrying with a growing ridge if Cholesky fails.
fn newton_direction(info: &DMatrix<f64>, g: &DVector<f64>, jitter: f64) -> Option<DVector<f64>> {
    if let Some(ch) = info.clone().cholesky() {
        return Some(ch.solve(g));
    }
    let scale = info.diagonal().mean().abs().max(f64::MIN_POSITIVE);
    let mut ridge = jitter * scale;
    for _ in 0..12 {
        let mut m = info.clone();
        for k in 0..m.nrows() {
            m[(k, k)] += ridge;
        }
        if let Some(ch) = m.cholesky() {
            log::debug!("information matrix regularized with ridge {ridge:.3e}");
            return Some(ch.solve(g));
        }
        ridge *= 10.0;
    }
    None
}

fn standard_errors(info: &DMatrix<f64>) -> Vec<f64> {
    match info.clone().cholesky() {
        Some(ch) => ch.inverse().diagonal().iter().map(|v| v.sqrt()).collect(),
        None => vec![f64::NAN; info.nrows()],
    }
}

/// Maximizes the Breslow partial likelihood by Newton–Raphson with step
/// halving, starting from β = 0, and attaches the baseline hazard at β̂.
pub fn fit(data: &DesignMatrix, options: &FitOptions) -> Result<CoxModel> {
    options.validate()?;
    let view = SurvivalView::from(data);
    let names = data.column_names();
    let p = data.ncols();

    let mut beta = DVector::<f64>::zeros(p);
    let mut current: Evaluation = evaluate(&view, beta.as_slice(), Order::Hessian)?;
    let mut iterations = 0;

    loop {
        if iterations == options.max_iterations {
            return Err(Error::Convergence {
                iterations,
                log_likelihood: current.log_likelihood,
                gradient_max_norm: max_norm(&current.gradient),
            });
        }
        iterations += 1;

        let info = -&current.hessian;
        check_rank(&info, &names, options.ridge_jitter)?;
        let delta = newton_direction(&info, &current.gradient, options.ridge_jitter)
            .ok_or_else(|| Error::RankDeficient { columns: names.clone() })?;
        let decrement = current.gradient.dot(&delta);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_step_halvings {
            let candidate = &beta + &delta * step;
            let ll = evaluate(&view, candidate.as_slice(), Order::Value)?.log_likelihood;
            if ll >= current.log_likelihood {
                accepted = Some((candidate, ll));
                break;
            }
            step *= 0.5;
        }

        let Some((candidate, ll)) = accepted else {
            // No ascent possible along the Newton direction: accept the
            // current point if it is already stationary to tolerance.
            if 0.5 * decrement < options.tolerance {
                break;
            }
            return Err(Error::Convergence {
                iterations,
                log_likelihood: current.log_likelihood,
                gradient_max_norm: max_norm(&current.gradient),
            });
        };

        let gain = ll - current.log_likelihood;
        beta = candidate;
        current = evaluate(&view, beta.as_slice(), Order::Hessian)?;
        log::trace!("newton iteration {iterations}: log L = {ll:.12}, gain {gain:.3e}");
        if gain < options.tolerance {
            break;
        }
    }

    let info = -&current.hessian;
    let diagnostics = FitDiagnostics {
        iterations,
        log_likelihood: current.log_likelihood,
        gradient_max_norm: max_norm(&current.gradient),
        standard_errors: standard_errors(&info),
    };
    let baseline = baseline_from_view(&view, beta.as_slice())?;
    CoxModel::new(
        beta.as_slice().to_vec(),
        baseline,
        data.features().clone(),
        diagnostics,
    )
}
