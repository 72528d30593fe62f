//! Regression baselines that treat the observed semester as a plain target.

mod ols;
mod svr;

use serde::{Deserialize, Serialize};

use crate::dataio::DesignMatrix;

pub use ols::{fit_ols, LinearModel};
pub use svr::{fit_svr, fit_svr_with, SvrDiagnostics, SvrModel, SvrOptions};

/// Which rows supply regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicy {
    /// Drop censored rows: their semester is only a lower bound.
    #[default]
    EventsOnly,
    /// Treat every observed semester as if it were a dropout.
    AllRows,
}

fn target_rows(data: &DesignMatrix, policy: TargetPolicy) -> Vec<usize> {
    (0..data.nrows())
        .filter(|&i| policy == TargetPolicy::AllRows || data.events()[i])
        .collect()
}
