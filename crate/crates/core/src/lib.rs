//! Time-to-dropout modelling for student cohorts: a Cox proportional-hazards
//! engine, least-squares and ε-SVR baselines, and a cross-validated benchmark
//! comparing them.

pub mod baselines;
pub mod cox;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod model;

pub use error::{Error, ErrorClass, Result};
pub use model::ModelDocument;
