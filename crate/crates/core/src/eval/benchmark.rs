use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kfold::stratified_kfold;
use super::metrics::{error_balance, mae, PredictionSet};
use super::report::{EvaluationReport, MetricSummary, ModelReport};
use crate::baselines::{fit_ols, fit_svr_with, SvrOptions, TargetPolicy};
use crate::cox::{fit, FitOptions};
use crate::dataio::{encode, Cohort, EncodingSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    Svr,
    Cox,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Ols, ModelKind::Svr, ModelKind::Cox];

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ols => "Regression",
            ModelKind::Svr => "SVR",
            ModelKind::Cox => "Cox",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub k: usize,
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub standardize: bool,
    pub cox: FitOptions,
    /// Survival level at which a Cox curve is read off as the dropout semester.
    pub threshold: f64,
    pub svr: SvrOptions,
    /// Round continuous baseline predictions to whole semesters before scoring.
    pub round_predictions: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            k: 5,
            seed: 0,
            models: ModelKind::ALL.to_vec(),
            standardize: true,
            cox: FitOptions::default(),
            threshold: 0.5,
            svr: SvrOptions::default(),
            round_predictions: false,
        }
    }
}

struct Task<'a> {
    model: ModelKind,
    fold: Option<usize>,
    train: Cohort,
    eval: &'a Cohort,
    eval_rows: Vec<usize>,
}

fn predict(task: &Task<'_>, spec: &EncodingSpec, config: &BenchmarkConfig) -> Result<PredictionSet> {
    let records = task.eval.records();
    let mut preds = PredictionSet::default();
    let mut add = |i: usize, value: f64| preds.push(value, records[i].time_observed);
    let rounded = |v: f64| if config.round_predictions { v.round() } else { v };

    match task.model {
        ModelKind::Cox => {
            let data = encode(&task.train, spec)?;
            let model = fit(&data, &config.cox)?;
            let horizon = task.train.horizon();
            for &i in &task.eval_rows {
                let p = model.predict_dropout_semester(&records[i].covariates, config.threshold, horizon)?;
                add(i, f64::from(p.semester))?;
            }
        }
        ModelKind::Ols => {
            let data = encode(&task.train.events_only(), spec)?;
            let model = fit_ols(&data, TargetPolicy::EventsOnly)?;
            for &i in &task.eval_rows {
                add(i, rounded(model.predict(&records[i].covariates)?))?;
            }
        }
        ModelKind::Svr => {
            let data = encode(&task.train.events_only(), spec)?;
            let options = SvrOptions {
                seed: config.seed,
                ..config.svr
            };
            let model = fit_svr_with(&data, &options)?;
            for &i in &task.eval_rows {
                add(i, rounded(model.predict(&records[i].covariates)?))?;
            }
        }
    }
    Ok(preds)
}

fn summarize(preds: &PredictionSet) -> Result<MetricSummary> {
    let balance = error_balance(preds)?;
    Ok(MetricSummary {
        mae: mae(preds)?,
        uper: balance.uper(),
        oper: balance.oper(),
        balance,
        n_predictions: preds.len(),
    })
}

/// Cross-validates every configured model on `train` and scores a final fit
/// on the event-observed members of `test`.
///
/// All models share one fold assignment. Fold fits run in parallel; results
/// are assembled by (model, fold), so the report does not depend on
/// scheduling.
pub fn run_benchmark(train: &Cohort, test: &Cohort, config: &BenchmarkConfig) -> Result<EvaluationReport> {
    if config.models.is_empty() {
        return Err(Error::Argument("no models selected".into()));
    }
    if !(config.threshold > 0.0 && config.threshold < 1.0) {
        return Err(Error::Argument(format!(
            "threshold must lie in (0, 1), got {}",
            config.threshold
        )));
    }
    let train_ids: std::collections::HashSet<&str> =
        train.records().iter().map(|r| r.student_id.as_str()).collect();
    if let Some(r) = test.records().iter().find(|r| train_ids.contains(r.student_id.as_str())) {
        return Err(Error::Validation(format!(
            "student `{}` appears in both training and test cohorts",
            r.student_id
        )));
    }

    let spec = EncodingSpec::infer(
        train.records().iter().chain(test.records()).map(|r| &r.covariates),
        config.standardize,
    );
    let folds = stratified_kfold(train, config.k, config.seed)?;

    let event_rows = |c: &Cohort, rows: &[usize]| -> Vec<usize> {
        rows.iter().copied().filter(|&i| c.records()[i].event).collect()
    };
    let all_test: Vec<usize> = (0..test.len()).collect();

    let mut tasks = Vec::new();
    for &model in &config.models {
        for (f, held_out) in folds.iter().enumerate() {
            let mut keep: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            keep.sort_unstable();
            tasks.push(Task {
                model,
                fold: Some(f),
                train: train.subset(&keep),
                eval: train,
                eval_rows: event_rows(train, held_out),
            });
        }
        tasks.push(Task {
            model,
            fold: None,
            train: train.clone(),
            eval: test,
            eval_rows: event_rows(test, &all_test),
        });
    }

    let results: Vec<Result<MetricSummary>> = tasks
        .par_iter()
        .map(|task| {
            predict(task, &spec, config)
                .and_then(|p| summarize(&p))
                .map_err(|e| Error::Fit {
                    model: task.model.label().to_string(),
                    fold: task.fold,
                    source: Box::new(e),
                })
        })
        .collect();

    let mut results = results.into_iter();
    let mut models = Vec::with_capacity(config.models.len());
    for &model in &config.models {
        let folds: Vec<MetricSummary> = results.by_ref().take(config.k).collect::<Result<_>>()?;
        let test = results.next().expect("one test task per model")?;
        models.push(ModelReport::new(model, folds, test));
    }

    Ok(EvaluationReport {
        seed: config.seed,
        k: config.k,
        n_train: train.len(),
        n_test: test.len(),
        models,
    })
}
