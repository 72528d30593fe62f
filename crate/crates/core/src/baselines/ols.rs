use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{target_rows, TargetPolicy};
use crate::dataio::{Covariates, DesignMatrix, FeatureMap};
use crate::error::{Error, Result};

/// `y = w₀ + w·x` with `x` on the fitted (scaled) basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub features: FeatureMap,
}

impl LinearModel {
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
        Ok(self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }

    pub fn predict(&self, x: &Covariates) -> Result<f64> {
        self.predict_scaled(&self.features.encode_row(x)?)
    }

    /// Intercept and weights expressed per raw covariate unit.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        let mut intercept = self.intercept;
        let weights = self
            .weights
            .iter()
            .zip(&self.features.columns)
            .map(|(w, c)| match c.scaling {
                Some(s) => {
                    intercept -= w * s.mean / s.sd;
                    w / s.sd
                }
                None => *w,
            })
            .collect();
        (intercept, weights)
    }
}

/// Least squares through a Householder QR of `[1 | X]`; the semester column is
/// the target.
pub fn fit_ols(data: &DesignMatrix, policy: TargetPolicy) -> Result<LinearModel> {
    let rows = target_rows(data, policy);
    let n = rows.len();
    let p = data.ncols() + 1;
    if n < p {
        return Err(Error::Underdetermined { rows: n, params: p });
    }
    let x = data.x();
    let a = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[(rows[i], j - 1)] });
    let y = DVector::from_iterator(n, rows.iter().map(|&i| f64::from(data.times()[i])));

    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let biggest = diag.iter().copied().fold(0.0, f64::max);
    let weak: Vec<String> = diag
        .iter()
        .enumerate()
        .filter(|(_, &d)| d.is_nan() || d <= 1e-10 * biggest)
        .map(|(k, _)| match k {
            0 => "(intercept)".to_string(),
            k => data.features().columns[k - 1].name.clone(),
        })
        .collect();
    if !weak.is_empty() {
        return Err(Error::RankDeficient { columns: weak });
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient { columns: data.column_names() })?;

    Ok(LinearModel {
        intercept: coef[0],
        weights: coef.iter().skip(1).copied().collect(),
        features: data.features().clone(),
    })
}
