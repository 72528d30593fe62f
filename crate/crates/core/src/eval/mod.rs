//! Prediction metrics, stratified cross-validation and the model benchmark.

mod benchmark;
mod kfold;
mod metrics;
mod report;

pub use benchmark::{run_benchmark, BenchmarkConfig, ModelKind};
pub use kfold::stratified_kfold;
pub use metrics::{error_balance, mae, oper, uper, ErrorBalance, PredictionSet};
pub use report::{CvSummary, EvaluationReport, Metric, MetricSummary, ModelReport, Phase, ReportCell};
