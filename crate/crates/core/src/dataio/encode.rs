//! Numeric encoding of cohorts into fit-ready design matrices.
//!
//! Categorical fields become one indicator column per non-reference level.
//! Numeric fields pass through, optionally standardized with the sample mean
//! and sample standard deviation (n − 1 denominator). Columns that are
//! constant over the encoded cohort are dropped with a warning. The resulting
//! [`FeatureMap`] remembers all of this so that a single raw record can be
//! mapped onto the same columns at prediction time.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::record::{CategoricalField, Cohort, Covariates, NumericField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldEncoding {
    Categorical {
        field: CategoricalField,
        levels: Vec<String>,
        reference: String,
    },
    Numeric {
        field: NumericField,
        standardize: bool,
    },
}

/// Which fields enter the design, and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    fields: Vec<FieldEncoding>,
}

impl EncodingSpec {
    pub fn new(fields: Vec<FieldEncoding>) -> Result<Self> {
        let mut seen_cat = HashSet::new();
        let mut seen_num = HashSet::new();
        for f in &fields {
            match f {
                FieldEncoding::Categorical {
                    field,
                    levels,
                    reference,
                } => {
                    if !seen_cat.insert(*field) {
                        return Err(Error::Encoding(format!("field `{field}` listed twice")));
                    }
                    let mut uniq = HashSet::new();
                    if let Some(dup) = levels.iter().find(|l| !uniq.insert(l.as_str())) {
                        return Err(Error::Encoding(format!(
                            "field `{field}` lists level `{dup}` twice"
                        )));
                    }
                    if !levels.contains(reference) {
                        return Err(Error::Encoding(format!(
                            "reference level `{reference}` of `{field}` is not among its levels"
                        )));
                    }
                }
                FieldEncoding::Numeric { field, .. } => {
                    if !seen_num.insert(*field) {
                        return Err(Error::Encoding(format!("field `{field}` listed twice")));
                    }
                }
            }
        }
        Ok(EncodingSpec { fields })
    }

    /// All sixteen attributes in CSV column order. Levels are sorted; the
    /// reference level is the most frequent one (lexicographically first on ties).
    pub fn infer<'a>(covariates: impl IntoIterator<Item = &'a Covariates>, standardize: bool) -> Self {
        let mut counts: BTreeMap<CategoricalField, BTreeMap<String, usize>> = BTreeMap::new();
        for c in covariates {
            for field in CategoricalField::ALL {
                *counts
                    .entry(field)
                    .or_default()
                    .entry(c.categorical(field).to_string())
                    .or_default() += 1;
            }
        }
        let categorical = |field: CategoricalField| -> Option<FieldEncoding> {
            let levels = counts.get(&field)?;
            let mut reference: Option<(&String, usize)> = None;
            for (level, &n) in levels {
                if reference.is_none_or(|(_, best)| n > best) {
                    reference = Some((level, n));
                }
            }
            Some(FieldEncoding::Categorical {
                field,
                levels: levels.keys().cloned().collect(),
                reference: reference?.0.clone(),
            })
        };
        let numeric = |field| FieldEncoding::Numeric { field, standardize };

        let mut fields = Vec::with_capacity(16);
        for field in [
            CategoricalField::Gender,
            CategoricalField::Ethnicity,
            CategoricalField::MaritalStatus,
            CategoricalField::ResidenceCounty,
        ] {
            fields.extend(categorical(field));
        }
        fields.extend(NumericField::ALL.into_iter().map(numeric));
        for field in [CategoricalField::College, CategoricalField::Major] {
            fields.extend(categorical(field));
        }
        EncodingSpec { fields }
    }

    pub fn fields(&self) -> &[FieldEncoding] {
        &self.fields
    }

    /// Same fields with every numeric standardization flag set to `on`.
    pub fn with_standardization(mut self, on: bool) -> Self {
        for f in &mut self.fields {
            if let FieldEncoding::Numeric { standardize, .. } = f {
                *standardize = on;
            }
        }
        self
    }

    fn check_levels(&self, c: &Covariates) -> Result<()> {
        for f in &self.fields {
            if let FieldEncoding::Categorical { field, levels, .. } = f {
                let value = c.categorical(*field);
                if !levels.iter().any(|l| l == value) {
                    return Err(Error::UnseenLevel {
                        field: field.name().to_string(),
                        value: value.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: f64,
    pub sd: f64,
}

impl Scaling {
    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.sd
    }

    pub fn invert(&self, scaled: f64) -> f64 {
        scaled * self.sd + self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnSource {
    Indicator { field: CategoricalField, level: String },
    Numeric { field: NumericField },
    /// Column supplied directly as a number, with no record field behind it.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub source: ColumnSource,
    pub scaling: Option<Scaling>,
}

/// Fitted mapping from raw records onto design columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub spec: Option<EncodingSpec>,
    pub columns: Vec<Column>,
}

impl FeatureMap {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn scaling(&self) -> Vec<Option<Scaling>> {
        self.columns.iter().map(|c| c.scaling).collect()
    }

    /// Raw (unscaled) value of every column for one record.
    pub fn raw_row(&self, c: &Covariates) -> Result<Vec<f64>> {
        let spec = self.spec.as_ref().ok_or_else(|| {
            Error::Encoding("model was fitted on a raw matrix and cannot encode records".into())
        })?;
        spec.check_levels(c)?;
        self.columns
            .iter()
            .map(|col| match &col.source {
                ColumnSource::Indicator { field, level } => {
                    Ok(if c.categorical(*field) == level { 1.0 } else { 0.0 })
                }
                ColumnSource::Numeric { field } => Ok(c.numeric(*field)),
                ColumnSource::Raw => Err(Error::Encoding(format!(
                    "column `{}` has no record field behind it",
                    col.name
                ))),
            })
            .collect()
    }

    /// Applies the stored scaling to a raw row.
    pub fn scale_row(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.columns.len() {
            return Err(Error::Argument(format!(
                "row has {} values, model expects {}",
                raw.len(),
                self.columns.len()
            )));
        }
        Ok(raw
            .iter()
            .zip(&self.columns)
            .map(|(&v, col)| col.scaling.map_or(v, |s| s.apply(v)))
            .collect())
    }

    /// Encodes one record onto the fitted (scaled) column basis.
    pub fn encode_row(&self, c: &Covariates) -> Result<Vec<f64>> {
        self.scale_row(&self.raw_row(c)?)
    }
}

/// Fit-ready numeric data. `x` is on the fitted basis, i.e. already scaled
/// wherever the feature map records a scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    times: Vec<u32>,
    events: Vec<bool>,
    features: FeatureMap,
}

impl DesignMatrix {
    /// Wraps a plain matrix; columns are used as-is.
    pub fn from_raw(
        x: DMatrix<f64>,
        times: Vec<u32>,
        events: Vec<bool>,
        names: Vec<String>,
    ) -> Result<Self> {
        let features = FeatureMap {
            spec: None,
            columns: names
                .into_iter()
                .map(|name| Column {
                    name,
                    source: ColumnSource::Raw,
                    scaling: None,
                })
                .collect(),
        };
        Self::assemble(x, times, events, features)
    }

    /// Convenience for tests and examples: default column names `x1..xp`.
    pub fn from_rows(rows: &[Vec<f64>], times: &[u32], events: &[bool]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Argument("ragged rows".into()));
        }
        let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        let names = (1..=p).map(|k| format!("x{k}")).collect();
        Self::from_raw(x, times.to_vec(), events.to_vec(), names)
    }

    fn assemble(
        x: DMatrix<f64>,
        times: Vec<u32>,
        events: Vec<bool>,
        features: FeatureMap,
    ) -> Result<Self> {
        let n = x.nrows();
        if times.len() != n || events.len() != n {
            return Err(Error::Argument(format!(
                "matrix has {n} rows but {} times and {} event flags",
                times.len(),
                events.len()
            )));
        }
        if x.ncols() == 0 || features.len() != x.ncols() {
            return Err(Error::Argument(format!(
                "design needs ≥ 1 column and one name per column (got {} columns, {} names)",
                x.ncols(),
                features.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("design matrix contains non-finite values".into()));
        }
        if times.iter().any(|&t| t < 1) {
            return Err(Error::Validation("time_observed ≥ 1 violated".into()));
        }
        Ok(DesignMatrix {
            x,
            times,
            events,
            features,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn column_names(&self) -> Vec<String> {
        self.features.column_names()
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    /// Undo column scaling, recovering raw-unit values.
    pub fn destandardized(&self) -> DMatrix<f64> {
        let mut raw = self.x.clone();
        for (j, col) in self.features.columns.iter().enumerate() {
            if let Some(s) = col.scaling {
                raw.column_mut(j).apply(|v| *v = s.invert(*v));
            }
        }
        raw
    }

    /// Standardizes every column that is not already scaled.
    pub fn standardized(&self) -> Result<Self> {
        let mut x = self.destandardized();
        let mut features = self.features.clone();
        for (j, col) in features.columns.iter_mut().enumerate() {
            let s = column_scaling(x.column(j).iter().copied()).ok_or_else(|| {
                Error::Encoding(format!("column `{}` is constant and cannot be standardized", col.name))
            })?;
            x.column_mut(j).apply(|v| *v = s.apply(*v));
            col.scaling = Some(s);
        }
        Self::assemble(x, self.times.clone(), self.events.clone(), features)
    }

    /// Rows at the given positions; column metadata is kept unchanged.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        DesignMatrix {
            x: self.x.select_rows(indices),
            times: indices.iter().map(|&i| self.times[i]).collect(),
            events: indices.iter().map(|&i| self.events[i]).collect(),
            features: self.features.clone(),
        }
    }
}

/// Sample mean and sd (n − 1); `None` when fewer than two rows or zero variance.
fn column_scaling(values: impl Iterator<Item = f64> + Clone) -> Option<Scaling> {
    let n = values.clone().count();
    if n < 2 {
        return None;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (sd > 0.0 && sd.is_finite()).then_some(Scaling { mean, sd })
}

/// Encodes a cohort under `spec`.
pub fn encode(cohort: &Cohort, spec: &EncodingSpec) -> Result<DesignMatrix> {
    let records = cohort.records();
    for r in records {
        spec.check_levels(&r.covariates)?;
    }

    let mut columns: Vec<(Column, Vec<f64>, bool)> = Vec::new();
    for f in spec.fields() {
        match f {
            FieldEncoding::Categorical {
                field,
                levels,
                reference,
            } => {
                for level in levels.iter().filter(|l| *l != reference) {
                    let values = records
                        .iter()
                        .map(|r| f64::from(u8::from(r.covariates.categorical(*field) == level)))
                        .collect();
                    let column = Column {
                        name: format!("{field}={level}"),
                        source: ColumnSource::Indicator {
                            field: *field,
                            level: level.clone(),
                        },
                        scaling: None,
                    };
                    columns.push((column, values, false));
                }
            }
            FieldEncoding::Numeric { field, standardize } => {
                let values = records.iter().map(|r| r.covariates.numeric(*field)).collect();
                let column = Column {
                    name: field.name().to_string(),
                    source: ColumnSource::Numeric { field: *field },
                    scaling: None,
                };
                columns.push((column, values, *standardize));
            }
        }
    }

    let mut kept = Vec::with_capacity(columns.len());
    for (mut column, mut values, standardize) in columns {
        let first = values.first().copied();
        if values.iter().all(|v| Some(*v) == first) {
            log::warn!("dropping constant column `{}`", column.name);
            continue;
        }
        if standardize {
            let s = column_scaling(values.iter().copied())
                .expect("non-constant column with ≥ 2 rows has positive sd");
            values.iter_mut().for_each(|v| *v = s.apply(*v));
            column.scaling = Some(s);
        }
        kept.push((column, values));
    }
    if kept.is_empty() {
        return Err(Error::Encoding(
            "no informative columns remain after dropping constant columns".into(),
        ));
    }

    let n = records.len();
    let x = DMatrix::from_fn(n, kept.len(), |i, j| kept[j].1[i]);
    let features = FeatureMap {
        spec: Some(spec.clone()),
        columns: kept.into_iter().map(|(c, _)| c).collect(),
    };
    DesignMatrix::assemble(
        x,
        records.iter().map(|r| r.time_observed).collect(),
        records.iter().map(|r| r.event).collect(),
        features,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::record::StudentRecord;

    pub(crate) fn covariates(gender: &str, major: &str, gpa: f64) -> Covariates {
        Covariates {
            gender: gender.into(),
            ethnicity: "Asian".into(),
            marital_status: "Single".into(),
            residence_county: "Harvey".into(),
            student_income: 10_000.0,
            father_income: 30_000.0,
            mother_income: 20_000.0,
            household_size: 3,
            hs_gpa: gpa,
            reading_score: 20.0,
            math_score: 21.0,
            science_score: 22.0,
            hs_grad_age: 18.0,
            admission_age: 18.3,
            college: "Business".into(),
            major: major.into(),
        }
    }

    fn cohort(rows: &[(&str, &str, f64)]) -> Cohort {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(g, m, gpa))| StudentRecord {
                student_id: format!("s{i}"),
                covariates: covariates(g, m, gpa),
                time_observed: 1 + i as u32,
                event: i % 2 == 0,
            })
            .collect();
        Cohort::new(records, 14).unwrap()
    }

    fn gender_spec() -> FieldEncoding {
        FieldEncoding::Categorical {
            field: CategoricalField::Gender,
            levels: vec!["M".into(), "F".into()],
            reference: "M".into(),
        }
    }

    #[test]
    fn indicator_for_non_reference_level() {
        let c = cohort(&[("F", "Math", 3.0), ("M", "Math", 2.0)]);
        let spec = EncodingSpec::new(vec![gender_spec()]).unwrap();
        let dm = encode(&c, &spec).unwrap();
        assert_eq!(dm.column_names(), vec!["gender=F"]);
        assert_eq!(dm.x()[(0, 0)], 1.0);
        assert_eq!(dm.x()[(1, 0)], 0.0);
    }

    #[test]
    fn shared_major_contributes_no_columns() {
        let c = cohort(&[("F", "Math", 3.0), ("M", "Math", 2.0), ("F", "Math", 2.5)]);
        let spec = EncodingSpec::infer(c.records().iter().map(|r| &r.covariates), true);
        let dm = encode(&c, &spec).unwrap();
        assert!(dm.column_names().iter().all(|n| !n.starts_with("major")));
        // Only gender and hs_gpa vary in this cohort.
        assert_eq!(dm.column_names(), vec!["gender=M", "hs_gpa"]);
    }

    #[test]
    fn standardized_gpa_matches_hand_computation() {
        // mean 3, sample sd sqrt(((-1)^2 + 0 + 1^2) / 2) = 1
        let c = cohort(&[("F", "Math", 2.0), ("M", "Math", 3.0), ("F", "Math", 4.0)]);
        let spec = EncodingSpec::new(vec![FieldEncoding::Numeric {
            field: NumericField::HsGpa,
            standardize: true,
        }])
        .unwrap();
        let dm = encode(&c, &spec).unwrap();
        let col: Vec<f64> = dm.x().column(0).iter().copied().collect();
        assert_eq!(col, vec![-1.0, 0.0, 1.0]);
        assert_eq!(dm.features().columns[0].scaling, Some(Scaling { mean: 3.0, sd: 1.0 }));
    }

    #[test]
    fn unseen_level_names_field_and_value() {
        let c = cohort(&[("X", "Math", 3.0), ("M", "Math", 2.0)]);
        let spec = EncodingSpec::new(vec![gender_spec()]).unwrap();
        match encode(&c, &spec) {
            Err(Error::UnseenLevel { field, value }) => {
                assert_eq!(field, "gender");
                assert_eq!(value, "X");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_invariants_enforced() {
        let bad_ref = FieldEncoding::Categorical {
            field: CategoricalField::Gender,
            levels: vec!["M".into(), "F".into()],
            reference: "X".into(),
        };
        assert!(EncodingSpec::new(vec![bad_ref]).is_err());
        let dup = FieldEncoding::Categorical {
            field: CategoricalField::Gender,
            levels: vec!["M".into(), "M".into()],
            reference: "M".into(),
        };
        assert!(EncodingSpec::new(vec![dup]).is_err());
    }

    #[test]
    fn all_constant_is_an_error() {
        let c = cohort(&[("F", "Math", 3.0), ("F", "Math", 3.0)]);
        let spec = EncodingSpec::new(vec![gender_spec()]).unwrap();
        assert!(matches!(encode(&c, &spec), Err(Error::Encoding(_))));
    }

    #[test]
    fn encode_row_reproduces_matrix_rows() {
        let c = cohort(&[("F", "Math", 2.2), ("M", "Bio", 3.1), ("F", "Bio", 3.9)]);
        let spec = EncodingSpec::infer(c.records().iter().map(|r| &r.covariates), true);
        let dm = encode(&c, &spec).unwrap();
        for (i, r) in c.records().iter().enumerate() {
            let row = dm.features().encode_row(&r.covariates).unwrap();
            let expected: Vec<f64> = dm.x().row(i).iter().copied().collect();
            assert_eq!(row, expected);
        }
    }

    #[test]
    fn reference_is_most_frequent_level() {
        let c = cohort(&[("F", "Math", 2.2), ("M", "Bio", 3.1), ("F", "Bio", 3.9)]);
        let spec = EncodingSpec::infer(c.records().iter().map(|r| &r.covariates), false);
        let gender = spec
            .fields()
            .iter()
            .find_map(|f| match f {
                FieldEncoding::Categorical {
                    field: CategoricalField::Gender,
                    reference,
                    ..
                } => Some(reference.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(gender, "F");
    }
}
