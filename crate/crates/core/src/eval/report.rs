use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::benchmark::ModelKind;
use super::metrics::ErrorBalance;
use crate::error::Result;

/// Metrics for one prediction set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mae: f64,
    pub uper: Option<f64>,
    pub oper: Option<f64>,
    pub balance: ErrorBalance,
    pub n_predictions: usize,
}

/// Cross-validation metrics averaged over folds (unweighted). UPER averages
/// only the folds where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub mae: f64,
    pub uper: Option<f64>,
    pub oper: Option<f64>,
    pub balance: ErrorBalance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelKind,
    pub cv: CvSummary,
    pub folds: Vec<MetricSummary>,
    pub test: MetricSummary,
}

impl ModelReport {
    pub fn new(model: ModelKind, folds: Vec<MetricSummary>, test: MetricSummary) -> Self {
        let k = folds.len() as f64;
        let mae = folds.iter().map(|f| f.mae).sum::<f64>() / k;
        let defined: Vec<f64> = folds.iter().filter_map(|f| f.uper).collect();
        let uper = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        let balance = folds.iter().fold(ErrorBalance::default(), |acc, f| ErrorBalance {
            under: acc.under + f.balance.under,
            over: acc.over + f.balance.over,
            exact: acc.exact + f.balance.exact,
        });
        ModelReport {
            model,
            cv: CvSummary {
                mae,
                uper,
                oper: uper.map(|u| 1.0 - u),
                balance,
            },
            folds,
            test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cv,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mae,
    Uper,
    Oper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub model: ModelKind,
    pub phase: Phase,
    pub metric: Metric,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: u64,
    pub k: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub models: Vec<ModelReport>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

impl EvaluationReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == kind)
    }

    /// Every (model, phase, metric) value, models in report order.
    pub fn cells(&self) -> Vec<ReportCell> {
        let mut out = Vec::with_capacity(self.models.len() * 6);
        for m in &self.models {
            let phases = [
                (Phase::Cv, m.cv.mae, m.cv.uper, m.cv.oper),
                (Phase::Test, m.test.mae, m.test.uper, m.test.oper),
            ];
            for (phase, mae, uper, oper) in phases {
                for (metric, value) in [(Metric::Mae, Some(mae)), (Metric::Uper, uper), (Metric::Oper, oper)] {
                    out.push(ReportCell {
                        model: m.model,
                        phase,
                        metric,
                        value,
                    });
                }
            }
        }
        out
    }

    /// Plain-text table with one row per model and CV / test column groups.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "seed {}  train {}  test {}",
            self.seed, self.n_train, self.n_test
        );
        let cv = format!("{}-fold CV", self.k);
        let _ = writeln!(s, "{:<12} {:^23}   {:^23}", "", cv, "Test");
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>7} {:>7}   {:>7} {:>7} {:>7}",
            "Method", "MAE", "UPER", "OPER", "MAE", "UPER", "OPER"
        );
        for m in &self.models {
            let _ = writeln!(
                s,
                "{:<12} {:>7} {:>7} {:>7}   {:>7} {:>7} {:>7}",
                m.model.label(),
                cell(Some(m.cv.mae)),
                cell(m.cv.uper),
                cell(m.cv.oper),
                cell(Some(m.test.mae)),
                cell(m.test.uper),
                cell(m.test.oper),
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
