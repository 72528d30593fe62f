//! Cohort CSV ingestion and emission.
//!
//! Header row required, comma separated, UTF-8. Columns may appear in any order
//! when reading; writing always uses [`COHORT_COLUMNS`] order.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use super::record::{Cohort, Covariates, StudentRecord};
use crate::error::{Error, Result};

pub const COHORT_COLUMNS: [&str; 19] = [
    "student_id",
    "gender",
    "ethnicity",
    "marital_status",
    "residence_county",
    "student_income",
    "father_income",
    "mother_income",
    "household_size",
    "hs_gpa",
    "reading_score",
    "math_score",
    "science_score",
    "hs_grad_age",
    "admission_age",
    "college",
    "major",
    "time_observed",
    "event",
];

/// Columns required for prediction input (no outcome columns).
pub const COVARIATE_COLUMNS: [&str; 17] = [
    "student_id",
    "gender",
    "ethnicity",
    "marital_status",
    "residence_county",
    "student_income",
    "father_income",
    "mother_income",
    "household_size",
    "hs_gpa",
    "reading_score",
    "math_score",
    "science_score",
    "hs_grad_age",
    "admission_age",
    "college",
    "major",
];

struct ColumnIndex {
    positions: Vec<usize>,
}

impl ColumnIndex {
    fn resolve(headers: &StringRecord, required: &[&str]) -> Result<Self> {
        let positions = required
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim() == *name)
                    .ok_or_else(|| Error::MissingColumn((*name).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ColumnIndex { positions })
    }

    fn get<'r>(&self, record: &'r StringRecord, col: usize) -> std::result::Result<&'r str, String> {
        let name = COHORT_COLUMNS[col];
        let raw = record
            .get(self.positions[col])
            .ok_or_else(|| format!("missing cell for `{name}`"))?
            .trim();
        if raw.is_empty() {
            return Err(format!("missing value for `{name}`"));
        }
        Ok(raw)
    }

    fn parse<T: FromStr>(&self, record: &StringRecord, col: usize) -> std::result::Result<T, String> {
        let raw = self.get(record, col)?;
        raw.parse()
            .map_err(|_| format!("cannot parse `{raw}` in column `{}`", COHORT_COLUMNS[col]))
    }

    fn covariates(&self, record: &StringRecord) -> std::result::Result<(String, Covariates), String> {
        let id = self.get(record, 0)?.to_string();
        let cov = Covariates {
            gender: self.get(record, 1)?.to_string(),
            ethnicity: self.get(record, 2)?.to_string(),
            marital_status: self.get(record, 3)?.to_string(),
            residence_county: self.get(record, 4)?.to_string(),
            student_income: self.parse(record, 5)?,
            father_income: self.parse(record, 6)?,
            mother_income: self.parse(record, 7)?,
            household_size: self.parse(record, 8)?,
            hs_gpa: self.parse(record, 9)?,
            reading_score: self.parse(record, 10)?,
            math_score: self.parse(record, 11)?,
            science_score: self.parse(record, 12)?,
            hs_grad_age: self.parse(record, 13)?,
            admission_age: self.parse(record, 14)?,
            college: self.get(record, 15)?.to_string(),
            major: self.get(record, 16)?.to_string(),
        };
        Ok((id, cov))
    }

    fn student(&self, record: &StringRecord) -> std::result::Result<StudentRecord, String> {
        let (student_id, covariates) = self.covariates(record)?;
        let time_observed: u32 = self.parse(record, 17)?;
        if time_observed < 1 {
            return Err(format!("time_observed ≥ 1 violated (got {time_observed})"));
        }
        let event = match self.get(record, 18)? {
            "1" => true,
            "0" => false,
            other => return Err(format!("event must be 0 or 1, got `{other}`")),
        };
        covariates.validate()?;
        Ok(StudentRecord {
            student_id,
            covariates,
            time_observed,
            event,
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Row {
        row,
        message: e.to_string(),
    }
}

pub fn load_cohort(path: impl AsRef<Path>, horizon: u32) -> Result<Cohort> {
    let path = path.as_ref();
    read_cohort(open(path)?, horizon)
}

/// Reads a cohort; row numbers in errors are 1-based data rows (header excluded).
pub fn read_cohort<R: Read>(reader: R, horizon: u32) -> Result<Cohort> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let index = ColumnIndex::resolve(&headers, &COHORT_COLUMNS)?;
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let student = index
            .student(&rec)
            .map_err(|message| Error::Row { row: i + 1, message })?;
        records.push(student);
    }
    Cohort::new(records, horizon)
}

/// One row of a prediction input file.
#[derive(Debug, Clone)]
pub struct CovariateRow {
    /// 1-based data row number.
    pub row: usize,
    pub parsed: std::result::Result<(String, Covariates), String>,
}

pub fn load_covariate_rows(path: impl AsRef<Path>) -> Result<Vec<CovariateRow>> {
    let path = path.as_ref();
    read_covariate_rows(open(path)?)
}

/// Reads covariate-only rows. Schema problems fail the whole file; bad cells
/// only fail their row.
pub fn read_covariate_rows<R: Read>(reader: R) -> Result<Vec<CovariateRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let index = ColumnIndex::resolve(&headers, &COVARIATE_COLUMNS)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let parsed = match rec {
            Ok(rec) => index.covariates(&rec).and_then(|(id, cov)| {
                cov.validate()?;
                Ok((id, cov))
            }),
            Err(e) => Err(e.to_string()),
        };
        rows.push(CovariateRow { row: i + 1, parsed });
    }
    Ok(rows)
}

pub fn write_cohort<W: Write>(cohort: &Cohort, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
    wtr.write_record(COHORT_COLUMNS).map_err(to_err)?;
    for r in cohort.records() {
        let c = &r.covariates;
        wtr.write_record([
            r.student_id.clone(),
            c.gender.clone(),
            c.ethnicity.clone(),
            c.marital_status.clone(),
            c.residence_county.clone(),
            c.student_income.to_string(),
            c.father_income.to_string(),
            c.mother_income.to_string(),
            c.household_size.to_string(),
            c.hs_gpa.to_string(),
            c.reading_score.to_string(),
            c.math_score.to_string(),
            c.science_score.to_string(),
            c.hs_grad_age.to_string(),
            c.admission_age.to_string(),
            c.college.clone(),
            c.major.clone(),
            r.time_observed.to_string(),
            if r.event { "1".into() } else { "0".into() },
        ])
        .map_err(to_err)?;
    }
    wtr.flush()
        .map_err(|e| Error::Validation(format!("csv write failed: {e}")))?;
    Ok(())
}
