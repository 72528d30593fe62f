//! Cox proportional-hazards regression: Breslow partial likelihood, Newton
//! fitting, baseline hazard and survival curves.

mod baseline;
mod curve;
mod fit;
mod likelihood;
mod model;

pub use baseline::{baseline_hazard, BaselineHazardTable, HazardStep};
pub use curve::{DropoutPrediction, SurvivalCurve};
pub use fit::{fit, FitDiagnostics, FitOptions};
pub use likelihood::{log_partial_likelihood, pll_gradient, pll_hessian};
pub use model::CoxModel;
