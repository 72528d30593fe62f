use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("encoding error: field `{field}` has unseen level `{value}`")]
    UnseenLevel { field: String, value: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("partial likelihood is undefined: the data contain no observed events")]
    NoEvents,

    #[error(
        "did not converge after {iterations} iterations \
         (log-likelihood {log_likelihood:.6}, max |gradient| {gradient_max_norm:.3e})"
    )]
    Convergence {
        iterations: usize,
        log_likelihood: f64,
        gradient_max_norm: f64,
    },

    #[error("SVR dual did not converge after {epochs} epochs (max violation {violation:.3e})")]
    SvrConvergence { epochs: usize, violation: f64 },

    #[error("rank-deficient design; suspect columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("underdetermined system: {rows} usable rows for {params} parameters")]
    Underdetermined { rows: usize, params: usize },

    #[error("prediction set is empty")]
    EmptyPredictions,

    #[error("stratum `{stratum}` has {size} members, fewer than k = {k}")]
    StratumTooSmall {
        stratum: &'static str,
        size: usize,
        k: usize,
    },

    #[error("{model} fit failed{}: {source}", fold_suffix(*.fold))]
    Fit {
        model: String,
        fold: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("model document error: {0}")]
    Document(#[from] serde_json::Error),
}

fn fold_suffix(fold: Option<usize>) -> String {
    match fold {
        Some(f) => format!(" on fold {}", f + 1),
        None => " on the full training set".to_string(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Argument(_) => ErrorClass::Usage,
            Error::NoEvents
            | Error::Convergence { .. }
            | Error::SvrConvergence { .. }
            | Error::RankDeficient { .. }
            | Error::Underdetermined { .. } => ErrorClass::Numerical,
            Error::Fit { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }
}
