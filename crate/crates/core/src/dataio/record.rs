use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Categorical pre-enrollment attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalField {
    Gender,
    Ethnicity,
    MaritalStatus,
    ResidenceCounty,
    College,
    Major,
}

/// Numeric pre-enrollment attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericField {
    StudentIncome,
    FatherIncome,
    MotherIncome,
    HouseholdSize,
    HsGpa,
    ReadingScore,
    MathScore,
    ScienceScore,
    HsGradAge,
    AdmissionAge,
}

impl CategoricalField {
    pub const ALL: [CategoricalField; 6] = [
        CategoricalField::Gender,
        CategoricalField::Ethnicity,
        CategoricalField::MaritalStatus,
        CategoricalField::ResidenceCounty,
        CategoricalField::College,
        CategoricalField::Major,
    ];

    /// Column name in the cohort CSV.
    pub fn name(self) -> &'static str {
        match self {
            CategoricalField::Gender => "gender",
            CategoricalField::Ethnicity => "ethnicity",
            CategoricalField::MaritalStatus => "marital_status",
            CategoricalField::ResidenceCounty => "residence_county",
            CategoricalField::College => "college",
            CategoricalField::Major => "major",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl NumericField {
    pub const ALL: [NumericField; 10] = [
        NumericField::StudentIncome,
        NumericField::FatherIncome,
        NumericField::MotherIncome,
        NumericField::HouseholdSize,
        NumericField::HsGpa,
        NumericField::ReadingScore,
        NumericField::MathScore,
        NumericField::ScienceScore,
        NumericField::HsGradAge,
        NumericField::AdmissionAge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NumericField::StudentIncome => "student_income",
            NumericField::FatherIncome => "father_income",
            NumericField::MotherIncome => "mother_income",
            NumericField::HouseholdSize => "household_size",
            NumericField::HsGpa => "hs_gpa",
            NumericField::ReadingScore => "reading_score",
            NumericField::MathScore => "math_score",
            NumericField::ScienceScore => "science_score",
            NumericField::HsGradAge => "hs_grad_age",
            NumericField::AdmissionAge => "admission_age",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for CategoricalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for NumericField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The sixteen attributes known at admission time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    pub gender: String,
    pub ethnicity: String,
    pub marital_status: String,
    pub residence_county: String,
    pub student_income: f64,
    pub father_income: f64,
    pub mother_income: f64,
    pub household_size: u32,
    pub hs_gpa: f64,
    pub reading_score: f64,
    pub math_score: f64,
    pub science_score: f64,
    pub hs_grad_age: f64,
    pub admission_age: f64,
    pub college: String,
    pub major: String,
}

impl Covariates {
    pub fn categorical(&self, field: CategoricalField) -> &str {
        match field {
            CategoricalField::Gender => &self.gender,
            CategoricalField::Ethnicity => &self.ethnicity,
            CategoricalField::MaritalStatus => &self.marital_status,
            CategoricalField::ResidenceCounty => &self.residence_county,
            CategoricalField::College => &self.college,
            CategoricalField::Major => &self.major,
        }
    }

    pub fn numeric(&self, field: NumericField) -> f64 {
        match field {
            NumericField::StudentIncome => self.student_income,
            NumericField::FatherIncome => self.father_income,
            NumericField::MotherIncome => self.mother_income,
            NumericField::HouseholdSize => f64::from(self.household_size),
            NumericField::HsGpa => self.hs_gpa,
            NumericField::ReadingScore => self.reading_score,
            NumericField::MathScore => self.math_score,
            NumericField::ScienceScore => self.science_score,
            NumericField::HsGradAge => self.hs_grad_age,
            NumericField::AdmissionAge => self.admission_age,
        }
    }

    /// Range checks on the attribute values. Returns soft warnings that do not
    /// invalidate the record.
    pub fn validate(&self) -> std::result::Result<Vec<String>, String> {
        for field in CategoricalField::ALL {
            if self.categorical(field).trim().is_empty() {
                return Err(format!("missing value for `{field}`"));
            }
        }
        for field in NumericField::ALL {
            let v = self.numeric(field);
            if !v.is_finite() {
                return Err(format!("`{field}` is not finite"));
            }
        }
        for (field, v) in [
            (NumericField::StudentIncome, self.student_income),
            (NumericField::FatherIncome, self.father_income),
            (NumericField::MotherIncome, self.mother_income),
        ] {
            if v < 0.0 {
                return Err(format!("`{field}` must be nonnegative, got {v}"));
            }
        }
        if self.household_size == 0 {
            return Err("`household_size` must be positive".into());
        }
        if !(0.0..=4.0).contains(&self.hs_gpa) {
            return Err(format!("`hs_gpa` must lie in [0, 4], got {}", self.hs_gpa));
        }
        if self.hs_grad_age <= 0.0 || self.admission_age <= 0.0 {
            return Err("ages must be positive".into());
        }
        let mut warnings = Vec::new();
        if self.admission_age < self.hs_grad_age - 1.0 {
            warnings.push(format!(
                "admission_age {} is more than a year before hs_grad_age {}",
                self.admission_age, self.hs_grad_age
            ));
        }
        Ok(warnings)
    }
}

/// One student: attributes plus the observed outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub student_id: String,
    pub covariates: Covariates,
    /// Semesters observed; the dropout semester when `event` is set.
    pub time_observed: u32,
    /// `true`: dropout observed at `time_observed`. `false`: right-censored there.
    pub event: bool,
}

/// A set of students tracked up to a common administrative horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    records: Vec<StudentRecord>,
    horizon: u32,
}

impl Cohort {
    pub fn new(records: Vec<StudentRecord>, horizon: u32) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Validation("horizon must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.time_observed < 1 {
                return Err(Error::Validation(format!(
                    "student `{}`: time_observed ≥ 1 violated (got {})",
                    r.student_id, r.time_observed
                )));
            }
            if r.time_observed > horizon {
                return Err(Error::Validation(format!(
                    "student `{}`: time_observed {} exceeds horizon {horizon}",
                    r.student_id, r.time_observed
                )));
            }
            match r.covariates.validate() {
                Ok(warnings) => {
                    for w in warnings {
                        log::warn!("student `{}`: {w}", r.student_id);
                    }
                }
                Err(msg) => {
                    return Err(Error::Validation(format!(
                        "student `{}`: {msg}",
                        r.student_id
                    )))
                }
            }
            if !seen.insert(r.student_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate student_id `{}`",
                    r.student_id
                )));
            }
        }
        Ok(Cohort { records, horizon })
    }

    pub fn records(&self) -> &[StudentRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<StudentRecord> {
        self.records
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    /// Sub-cohort made of the given record positions, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Cohort {
        Cohort {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            horizon: self.horizon,
        }
    }

    /// Only the students whose dropout was observed.
    pub fn events_only(&self) -> Cohort {
        Cohort {
            records: self.records.iter().filter(|r| r.event).cloned().collect(),
            horizon: self.horizon,
        }
    }
}
