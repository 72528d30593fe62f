//! Cohort data model, CSV ingestion, design-matrix encoding and synthetic cohorts.

mod csv;
mod encode;
mod record;
mod split;
pub mod synthetic;

pub use self::csv::{
    load_cohort, load_covariate_rows, read_cohort, read_covariate_rows, write_cohort, CovariateRow,
    COHORT_COLUMNS, COVARIATE_COLUMNS,
};
pub use encode::{
    encode, Column, ColumnSource, DesignMatrix, EncodingSpec, FeatureMap, FieldEncoding, Scaling,
};
pub use record::{CategoricalField, Cohort, Covariates, NumericField, StudentRecord};
pub(crate) use split::shuffled_strata;
pub use split::split_train_test;
pub use synthetic::{generate_synthetic, Effect, SyntheticConfig};
