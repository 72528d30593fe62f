mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use attrition::eval::ModelKind;
use attrition::ErrorClass;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Predict when students drop out, and benchmark Cox regression against
/// least-squares and SVR baselines.
#[derive(Debug, Parser)]
#[command(name = "attrition", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic cohort CSV from a TOML generator config.
    Generate(GenerateArgs),
    /// Fit a model on a cohort CSV and write the model JSON.
    Train(TrainArgs),
    /// Predict dropout semesters for covariate-only rows.
    Predict(PredictArgs),
    /// Cross-validate and test all three models; write text and JSON reports.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Cox,
    Ols,
    Svr,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cox => ModelKind::Cox,
            KindArg::Ols => ModelKind::Ols,
            KindArg::Svr => ModelKind::Svr,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator config (TOML).
    #[arg(long, visible_alias = "input")]
    pub config: PathBuf,
    /// Destination CSV.
    #[arg(long)]
    pub output: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SvrArgs {
    /// Half-width of the SVR insensitive tube, in semesters.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// SVR slack penalty.
    #[arg(long, default_value_t = 1.0)]
    pub cost: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training cohort CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Destination model JSON.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub model_kind: KindArg,
    /// Last trackable semester; observed times beyond it are rejected.
    #[arg(long, default_value_t = 14)]
    pub horizon: u32,
    /// Seeds the SVR coordinate order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub svr: SvrArgs,
    /// Fit numeric covariates in raw units instead of standardizing them.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of covariate rows (time and event columns are ignored if present).
    #[arg(long)]
    pub input: PathBuf,
    /// Destination CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Survival level read off as the predicted semester (Cox only).
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 14)]
    pub horizon: u32,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Training cohort CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Held-out cohort CSV. Without it, `--test-fraction` of the input is held out.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2, conflicts_with = "test")]
    pub test_fraction: f64,
    /// Destination for the text report; printed to standard output either way.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Destination for the JSON report.
    #[arg(long)]
    pub report_json: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub svr: SvrArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 14)]
    pub horizon: u32,
    /// Round baseline predictions to whole semesters before scoring.
    #[arg(long)]
    pub round_predictions: bool,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
