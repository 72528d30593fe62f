//! Log partial likelihood of the proportional-hazards model and its first two
//! derivatives, with Breslow handling of tied event times.
//!
//! All risk-set sums are accumulated over subjects sorted by descending time,
//! with every weight computed as `exp(η − max η)` so that large linear
//! predictors cannot overflow.

use nalgebra::{DMatrix, DVector};

use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};

/// Borrowed survival data: covariates on the fitted basis plus outcomes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SurvivalView<'a> {
    pub x: &'a DMatrix<f64>,
    pub times: &'a [u32],
    pub events: &'a [bool],
}

impl<'a> From<&'a DesignMatrix> for SurvivalView<'a> {
    fn from(d: &'a DesignMatrix) -> Self {
        SurvivalView {
            x: d.x(),
            times: d.times(),
            events: d.events(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Order {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub log_likelihood: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Subject positions sorted by descending time; ties keep index order.
pub(crate) fn descending_order(times: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].cmp(&times[a]).then(a.cmp(&b)));
    order
}

fn check_beta(view: &SurvivalView<'_>, beta: &[f64]) -> Result<()> {
    if beta.len() != view.x.ncols() {
        return Err(Error::Argument(format!(
            "coefficient vector has length {}, design has {} columns",
            beta.len(),
            view.x.ncols()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Argument("coefficients must be finite".into()));
    }
    if !view.events.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    Ok(())
}

pub(crate) fn evaluate(view: &SurvivalView<'_>, beta: &[f64], order: Order) -> Result<Evaluation> {
    check_beta(view, beta)?;
    let n = view.x.nrows();
    let p = view.x.ncols();
    let beta_v = DVector::from_column_slice(beta);
    let eta = view.x * &beta_v;
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut log_likelihood = 0.0;
    let mut gradient = DVector::zeros(p);
    let mut hessian = DMatrix::zeros(p, p);

    let mut s0 = 0.0;
    let mut s1 = DVector::<f64>::zeros(p);
    let mut s2 = DMatrix::<f64>::zeros(p, p);

    let sorted = descending_order(view.times);
    let mut start = 0;
    while start < n {
        let t = view.times[sorted[start]];
        let mut end = start;
        let mut deaths = 0usize;
        let mut eta_sum = 0.0;
        let mut x_sum = DVector::<f64>::zeros(p);
        while end < n && view.times[sorted[end]] == t {
            let i = sorted[end];
            let w = (eta[i] - shift).exp();
            let xi = view.x.row(i).transpose();
            s0 += w;
            if order >= Order::Gradient {
                s1.axpy(w, &xi, 1.0);
            }
            if order >= Order::Hessian {
                s2.ger(w, &xi, &xi, 1.0);
            }
            if view.events[i] {
                deaths += 1;
                eta_sum += eta[i];
                if order >= Order::Gradient {
                    x_sum += &xi;
                }
            }
            end += 1;
        }
        if deaths > 0 {
            let d = deaths as f64;
            log_likelihood += eta_sum - d * (shift + s0.ln());
            if order >= Order::Gradient {
                let mean = &s1 / s0;
                gradient += x_sum - &mean * d;
                if order >= Order::Hessian {
                    let cov = &s2 / s0 - &mean * mean.transpose();
                    hessian -= cov * d;
                }
            }
        }
        start = end;
    }

    Ok(Evaluation {
        log_likelihood,
        gradient,
        hessian,
    })
}

/// Breslow log partial likelihood at `beta`.
pub fn log_partial_likelihood(data: &DesignMatrix, beta: &[f64]) -> Result<f64> {
    Ok(evaluate(&data.into(), beta, Order::Value)?.log_likelihood)
}

/// Gradient: Σ over events of `xᵢ − x̄ᵢ(β)`, the risk-set weighted mean.
pub fn pll_gradient(data: &DesignMatrix, beta: &[f64]) -> Result<DVector<f64>> {
    Ok(evaluate(&data.into(), beta, Order::Gradient)?.gradient)
}

/// Hessian: minus the sum over events of the risk-set weighted covariance.
pub fn pll_hessian(data: &DesignMatrix, beta: &[f64]) -> Result<DMatrix<f64>> {
    Ok(evaluate(&data.into(), beta, Order::Hessian)?.hessian)
}
