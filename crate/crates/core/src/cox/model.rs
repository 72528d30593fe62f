use serde::{Deserialize, Serialize};

use super::baseline::BaselineHazardTable;
use super::curve::{DropoutPrediction, SurvivalCurve};
use super::fit::FitDiagnostics;
use crate::dataio::{Covariates, FeatureMap};
use crate::error::{Error, Result};

/// Fitted proportional-hazards model. Coefficients live on the fitted basis;
/// the feature map carries the encoding and scaling needed to take raw records
/// onto that basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoxModelDoc")]
pub struct CoxModel {
    beta: Vec<f64>,
    column_names: Vec<String>,
    features: FeatureMap,
    baseline: BaselineHazardTable,
    diagnostics: FitDiagnostics,
}

#[derive(Deserialize)]
struct CoxModelDoc {
    beta: Vec<f64>,
    column_names: Vec<String>,
    features: FeatureMap,
    baseline: BaselineHazardTable,
    diagnostics: FitDiagnostics,
}

impl TryFrom<CoxModelDoc> for CoxModel {
    type Error = Error;

    fn try_from(d: CoxModelDoc) -> Result<Self> {
        if d.column_names != d.features.column_names() {
            return Err(Error::Validation(
                "column_names disagree with the feature map".into(),
            ));
        }
        CoxModel::new(d.beta, d.baseline, d.features, d.diagnostics)
    }
}

impl CoxModel {
    pub fn new(
        beta: Vec<f64>,
        baseline: BaselineHazardTable,
        features: FeatureMap,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        if beta.len() != features.len() {
            return Err(Error::Validation(format!(
                "{} coefficients for {} columns",
                beta.len(),
                features.len()
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Validation("coefficients must be finite".into()));
        }
        Ok(CoxModel {
            beta,
            column_names: features.column_names(),
            features,
            baseline,
            diagnostics,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn baseline(&self) -> &BaselineHazardTable {
        &self.baseline
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    /// Coefficients per raw unit of each covariate (β divided by column sd).
    pub fn raw_coefficients(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.features.columns)
            .map(|(b, c)| c.scaling.map_or(*b, |s| b / s.sd))
            .collect()
    }

    /// βx for a row already on the fitted basis.
    pub fn linear_predictor_scaled(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.beta.len() {
            return Err(Error::Argument(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.beta.len()
            )));
        }
        Ok(row.iter().zip(&self.beta).map(|(x, b)| x * b).sum())
    }

    pub fn linear_predictor(&self, x: &Covariates) -> Result<f64> {
        self.linear_predictor_scaled(&self.features.encode_row(x)?)
    }

    pub fn survival_curve_scaled(&self, row: &[f64]) -> Result<SurvivalCurve> {
        Ok(SurvivalCurve::from_baseline(
            &self.baseline,
            self.linear_predictor_scaled(row)?,
        ))
    }

    pub fn survival_curve(&self, x: &Covariates) -> Result<SurvivalCurve> {
        self.survival_curve_scaled(&self.features.encode_row(x)?)
    }

    pub fn predict_scaled(&self, row: &[f64], threshold: f64, horizon: u32) -> Result<DropoutPrediction> {
        self.survival_curve_scaled(row)?.first_crossing(threshold, horizon)
    }

    /// Median-survival style prediction: first semester with S(t | x) ≤ threshold.
    pub fn predict_dropout_semester(
        &self,
        x: &Covariates,
        threshold: f64,
        horizon: u32,
    ) -> Result<DropoutPrediction> {
        self.survival_curve(x)?.first_crossing(threshold, horizon)
    }
}
