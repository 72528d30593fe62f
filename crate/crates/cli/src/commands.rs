use std::fmt::Write as _;
use std::io::Write;

use attrition::baselines::{fit_ols, fit_svr_with, SvrOptions, TargetPolicy};
use attrition::cox::{fit, FitOptions};
use attrition::dataio::synthetic::dropout_histogram;
use attrition::dataio::{
    encode, generate_synthetic, load_cohort, load_covariate_rows, split_train_test, write_cohort,
    Covariates, EncodingSpec, SyntheticConfig,
};
use attrition::eval::{run_benchmark, BenchmarkConfig, ModelKind};
use attrition::{Error, ModelDocument, Result};

use crate::output::{write_atomic, write_text};
use crate::{Command, EvaluateArgs, GenerateArgs, PredictArgs, TrainArgs};

/// Runs one subcommand; the returned value is the process exit status.
pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Generate(a) => generate(a).map(|()| 0),
        Command::Train(a) => train(a).map(|()| 0),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a).map(|()| 0),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut config = SyntheticConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let cohort = generate_synthetic(&config)?;
    write_atomic(&args.output, |w| write_cohort(&cohort, w))?;

    let n = cohort.len();
    let events = cohort.n_events();
    println!("seed {}", config.seed);
    println!(
        "students {n}  dropouts {events}  event rate {:.3}  censored {}",
        events as f64 / n as f64,
        n - events
    );
    println!("dropouts by semester:");
    for (t, count) in dropout_histogram(&cohort).iter().enumerate() {
        println!("  {:>3} {count:>6}", t + 1);
    }
    Ok(())
}

fn svr_options(epsilon: f64, cost: f64, seed: u64) -> SvrOptions {
    SvrOptions {
        epsilon,
        cost,
        seed,
        ..SvrOptions::default()
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let cohort = load_cohort(&args.input, args.horizon)?;
    let spec = EncodingSpec::infer(
        cohort.records().iter().map(|r| &r.covariates),
        !args.no_standardize,
    );
    println!("seed {}", args.seed);
    let document = match ModelKind::from(args.model_kind) {
        ModelKind::Cox => {
            let model = fit(&encode(&cohort, &spec)?, &FitOptions::default())?;
            let d = model.diagnostics();
            println!(
                "cox: {} iterations, log partial likelihood {:.6}, max |gradient| {:.3e}",
                d.iterations, d.log_likelihood, d.gradient_max_norm
            );
            for ((name, b), se) in model.column_names().iter().zip(model.beta()).zip(&d.standard_errors) {
                println!("  {name:<32} {b:>10.4} (se {se:.4})");
            }
            ModelDocument::Cox(model)
        }
        ModelKind::Ols => {
            let data = encode(&cohort.events_only(), &spec)?;
            let model = fit_ols(&data, TargetPolicy::EventsOnly)?;
            println!("ols: {} event rows, intercept {:.4}", data.nrows(), model.intercept);
            ModelDocument::Ols(model)
        }
        ModelKind::Svr => {
            let data = encode(&cohort.events_only(), &spec)?;
            let model = fit_svr_with(&data, &svr_options(args.svr.epsilon, args.svr.cost, args.seed))?;
            let d = model.diagnostics;
            println!(
                "svr: {} epochs, max violation {:.3e}, relative duality gap {:.3e}, {} support rows",
                d.epochs,
                d.max_violation,
                d.relative_gap,
                model.support_indices.len()
            );
            ModelDocument::Svr(model)
        }
    };
    let json = document.to_json()?;
    write_text(&args.output, &json)
}

fn predict_one(
    document: &ModelDocument,
    covariates: &Covariates,
    args: &PredictArgs,
) -> Result<String> {
    Ok(match document {
        ModelDocument::Cox(model) => {
            let curve = model.survival_curve(covariates)?;
            let p = curve.first_crossing(args.threshold, args.horizon)?;
            let points = curve
                .points()
                .iter()
                .skip(1)
                .map(|(t, s)| format!("{t}:{s}"))
                .collect::<Vec<_>>()
                .join(" ");
            format!("{},{},{}", p.semester, p.beyond_horizon, points)
        }
        ModelDocument::Ols(model) => format!("{},,", model.predict(covariates)?),
        ModelDocument::Svr(model) => format!("{},,", model.predict(covariates)?),
    })
}

fn predict(args: PredictArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.model).map_err(|e| Error::io(&args.model, e))?;
    let document = ModelDocument::from_json(&text)?;
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(Error::Argument(format!(
            "threshold must lie in (0, 1), got {}",
            args.threshold
        )));
    }
    let rows = load_covariate_rows(&args.input)?;

    let mut out = String::from("student_id,predicted_semester,beyond_horizon,survival_curve\n");
    let mut failures = 0;
    for row in &rows {
        let result = row
            .parsed
            .as_ref()
            .map_err(|m| Error::Validation(m.clone()))
            .and_then(|(id, cov)| Ok((id, predict_one(&document, cov, &args)?)));
        match result {
            Ok((id, line)) => {
                let _ = writeln!(out, "{id},{line}");
            }
            Err(e) => {
                failures += 1;
                eprintln!("row {}: {e}", row.row);
            }
        }
    }
    match &args.output {
        Some(path) => write_text(path, &out)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    if failures > 0 {
        eprintln!("{failures} of {} rows could not be predicted", rows.len());
        return Ok(2);
    }
    Ok(0)
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let cohort = load_cohort(&args.input, args.horizon)?;
    let (train, test) = match &args.test {
        Some(path) => (cohort, load_cohort(path, args.horizon)?),
        None => split_train_test(&cohort, args.test_fraction, args.seed)?,
    };
    let config = BenchmarkConfig {
        k: args.k,
        seed: args.seed,
        threshold: args.threshold,
        svr: svr_options(args.svr.epsilon, args.svr.cost, args.seed),
        round_predictions: args.round_predictions,
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&train, &test, &config)?;
    let text = report.to_text();
    print!("{text}");
    if let Some(path) = &args.output {
        write_text(path, &text)?;
    }
    if let Some(path) = &args.report_json {
        write_text(path, &report.to_json()?)?;
    }
    Ok(())
}
