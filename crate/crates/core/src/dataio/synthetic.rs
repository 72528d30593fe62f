//! Synthetic cohorts drawn from a known discrete-time proportional-hazards model.
//!
//! Covariate distributions (all draws from one ChaCha8 stream seeded by the config):
//!
//! | field | distribution |
//! |---|---|
//! | categorical fields | uniform over the fixed level lists below |
//! | `student_income` | log-normal, median 12 000, σ 0.6, whole dollars |
//! | `father_income` | log-normal, median 45 000, σ 0.7 |
//! | `mother_income` | log-normal, median 38 000, σ 0.7 |
//! | `household_size` | 1 + Poisson(2) |
//! | `hs_gpa` | normal(3.0, 0.5) truncated to [0, 4], two decimals |
//! | test scores | normal(≈21.5, 5) clamped to [1, 36], one decimal |
//! | `hs_grad_age` | normal(18.1, 0.4) clamped to [16, 22], one decimal |
//! | `admission_age` | `hs_grad_age` + exponential(mean 0.7), one decimal |
//!
//! Each effect term acts on either an indicator (`field=level`) or a numeric
//! field standardized with the generated cohort's own sample mean and sd, so
//! the configured coefficients are exactly the coefficients of
//! [`encode`](super::encode) output with standardization on.
//!
//! Outcomes: a student still enrolled at the start of semester `t` drops out
//! during it with probability `1 − exp(−h₀(t)·exp(η))`. Students surviving the
//! horizon are censored there. Independently, each student is lost to
//! follow-up with probability `censor_rate` at a semester drawn uniformly from
//! `1..=horizon`; a dropout strictly after that semester is then unobserved.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::record::{CategoricalField, Cohort, Covariates, NumericField, StudentRecord};
use crate::error::{Error, Result};

pub const GENDERS: &[&str] = &["F", "M"];
pub const ETHNICITIES: &[&str] = &["Asian", "Black", "Hispanic", "Other", "White"];
pub const MARITAL_STATUSES: &[&str] = &["Divorced", "Married", "Single"];
pub const COUNTIES: &[&str] = &["Centerville", "Eastbrook", "Northfield", "Southgate", "Westmoor"];
pub const COLLEGES: &[&str] = &["Business", "Education", "Engineering", "Health", "LiberalArts"];
pub const MAJORS: &[&str] = &[
    "Accounting",
    "Biology",
    "ComputerScience",
    "Economics",
    "English",
    "MechanicalEngineering",
    "Nursing",
    "Psychology",
];

pub fn levels(field: CategoricalField) -> &'static [&'static str] {
    match field {
        CategoricalField::Gender => GENDERS,
        CategoricalField::Ethnicity => ETHNICITIES,
        CategoricalField::MaritalStatus => MARITAL_STATUSES,
        CategoricalField::ResidenceCounty => COUNTIES,
        CategoricalField::College => COLLEGES,
        CategoricalField::Major => MAJORS,
    }
}

/// One coefficient of the true linear predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    /// `numeric_field` or `categorical_field=level`.
    pub term: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_students: usize,
    pub horizon: u32,
    /// h₀(t) for t = 1..=horizon.
    pub baseline_hazard: Vec<f64>,
    #[serde(default)]
    pub effects: Vec<Effect>,
    #[serde(default)]
    pub censor_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Indicator(CategoricalField, String),
    Numeric(NumericField),
}

fn parse_term(term: &str) -> Result<Term> {
    if let Some((field, level)) = term.split_once('=') {
        let field = CategoricalField::from_name(field.trim())
            .ok_or_else(|| Error::Config(format!("unknown categorical field in term `{term}`")))?;
        let level = level.trim();
        if !levels(field).contains(&level) {
            return Err(Error::Config(format!(
                "term `{term}`: `{level}` is not a generated level of `{field}`"
            )));
        }
        Ok(Term::Indicator(field, level.to_string()))
    } else {
        NumericField::from_name(term.trim())
            .map(Term::Numeric)
            .ok_or_else(|| Error::Config(format!("unknown numeric field in term `{term}`")))
    }
}

impl SyntheticConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SyntheticConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_students == 0 {
            return Err(Error::Config("n_students must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.baseline_hazard.len() != self.horizon as usize {
            return Err(Error::Config(format!(
                "baseline_hazard has {} entries, horizon is {}",
                self.baseline_hazard.len(),
                self.horizon
            )));
        }
        if let Some(h) = self
            .baseline_hazard
            .iter()
            .find(|h| !(h.is_finite() && **h > 0.0))
        {
            return Err(Error::Config(format!("baseline hazards must be positive, got {h}")));
        }
        if !(0.0..1.0).contains(&self.censor_rate) {
            return Err(Error::Config(format!(
                "censor_rate must lie in [0, 1), got {}",
                self.censor_rate
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.effects {
            let term = parse_term(&e.term)?;
            if !e.coefficient.is_finite() {
                return Err(Error::Config(format!("coefficient of `{}` is not finite", e.term)));
            }
            if !seen.insert(format!("{term:?}")) {
                return Err(Error::Config(format!("term `{}` listed twice", e.term)));
            }
        }
        Ok(())
    }

    /// The configured coefficients in declaration order.
    pub fn true_beta(&self) -> Vec<f64> {
        self.effects.iter().map(|e| e.coefficient).collect()
    }

    /// Semester-scale benchmark cohort: 5000 students, 14 semesters, most
    /// dropouts in the first two semesters and about 30% of records censored.
    pub fn reference_benchmark() -> Self {
        let effect = |term: &str, coefficient| Effect {
            term: term.into(),
            coefficient,
        };
        SyntheticConfig {
            n_students: 5000,
            horizon: 14,
            baseline_hazard: vec![
                0.32, 0.24, 0.13, 0.10, 0.08, 0.07, 0.06, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05,
            ],
            effects: vec![
                effect("hs_gpa", -0.6),
                effect("math_score", -0.3),
                effect("student_income", -0.2),
                effect("admission_age", 0.3),
                effect("gender=M", 0.2),
                effect("marital_status=Married", -0.3),
                effect("college=Engineering", 0.25),
            ],
            censor_rate: 0.1,
            seed: 20_170_401,
        }
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

fn pick<R: Rng>(rng: &mut R, options: &[&str]) -> String {
    options[rng.random_range(0..options.len())].to_string()
}

fn draw_covariates<R: Rng>(rng: &mut R) -> Covariates {
    let log_normal = |median: f64, sigma: f64| LogNormal::new(median.ln(), sigma).expect("valid");
    let score = |mean: f64| Normal::<f64>::new(mean, 5.0).expect("valid");
    let gpa = Normal::<f64>::new(3.0, 0.5).expect("valid");
    let grad_age = Normal::<f64>::new(18.1, 0.4).expect("valid");
    let gap = Exp::<f64>::new(1.0 / 0.7).expect("valid");
    let household = Poisson::new(2.0).expect("valid");

    let gender = pick(rng, GENDERS);
    let ethnicity = pick(rng, ETHNICITIES);
    let marital_status = pick(rng, MARITAL_STATUSES);
    let residence_county = pick(rng, COUNTIES);
    let student_income = log_normal(12_000.0, 0.6).sample(rng).round();
    let father_income = log_normal(45_000.0, 0.7).sample(rng).round();
    let mother_income = log_normal(38_000.0, 0.7).sample(rng).round();
    let household_size = 1 + household.sample(rng) as u32;
    let hs_gpa = loop {
        let g: f64 = gpa.sample(rng);
        if (0.0..=4.0).contains(&g) {
            break round_to(g, 2);
        }
    };
    let mut test_score = |mean| round_to(score(mean).sample(rng).clamp(1.0, 36.0), 1);
    let reading_score = test_score(22.0);
    let math_score = test_score(21.0);
    let science_score = test_score(21.5);
    let hs_grad_age_raw = grad_age.sample(rng).clamp(16.0, 22.0);
    let admission_age = round_to(hs_grad_age_raw + gap.sample(rng), 1);
    let hs_grad_age = round_to(hs_grad_age_raw, 1);
    let college = pick(rng, COLLEGES);
    let major = pick(rng, MAJORS);

    Covariates {
        gender,
        ethnicity,
        marital_status,
        residence_county,
        student_income,
        father_income,
        mother_income,
        household_size,
        hs_gpa,
        reading_score,
        math_score,
        science_score,
        hs_grad_age,
        admission_age,
        college,
        major,
    }
}

/// Linear predictor of every student under the configured effects.
fn linear_predictors(config: &SyntheticConfig, covariates: &[Covariates]) -> Result<Vec<f64>> {
    let n = covariates.len();
    let mut eta = vec![0.0; n];
    for effect in &config.effects {
        let column: Vec<f64> = match parse_term(&effect.term)? {
            Term::Indicator(field, level) => covariates
                .iter()
                .map(|c| f64::from(u8::from(c.categorical(field) == level)))
                .collect(),
            Term::Numeric(field) => {
                let raw: Vec<f64> = covariates.iter().map(|c| c.numeric(field)).collect();
                if n < 2 {
                    return Err(Error::Config(format!(
                        "numeric effect `{}` needs at least two students",
                        effect.term
                    )));
                }
                let mean = raw.iter().sum::<f64>() / n as f64;
                let sd = (raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
                if sd.is_nan() || sd <= 0.0 {
                    return Err(Error::Config(format!(
                        "numeric effect `{}` has zero variance",
                        effect.term
                    )));
                }
                raw.iter().map(|v| (v - mean) / sd).collect()
            }
        };
        for (e, z) in eta.iter_mut().zip(column) {
            *e += effect.coefficient * z;
        }
    }
    Ok(eta)
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Cohort> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let covariates: Vec<Covariates> = (0..config.n_students)
        .map(|_| draw_covariates(&mut rng))
        .collect();
    let eta = linear_predictors(config, &covariates)?;

    // Survival through a semester must keep positive probability.
    for (i, &e) in eta.iter().enumerate() {
        let risk = e.exp();
        for (t, &h) in config.baseline_hazard.iter().enumerate() {
            let rate = h * risk;
            if !rate.is_finite() || (-rate).exp() <= 0.0 {
                return Err(Error::Config(format!(
                    "infeasible hazard: student {} has dropout probability 1 in semester {}",
                    i + 1,
                    t + 1
                )));
            }
        }
    }

    let width = config.n_students.to_string().len().max(4);
    let horizon = config.horizon;
    let mut records = Vec::with_capacity(config.n_students);
    for (i, (cov, &e)) in covariates.into_iter().zip(&eta).enumerate() {
        let risk = e.exp();
        let mut dropout = None;
        for (t, &h) in config.baseline_hazard.iter().enumerate() {
            let p = -(-h * risk).exp_m1();
            if rng.random::<f64>() < p {
                dropout = Some(t as u32 + 1);
                break;
            }
        }
        let lost = rng.random::<f64>() < config.censor_rate;
        let lost_at = rng.random_range(1..=horizon);

        let (time_observed, event) = match (dropout, lost) {
            (Some(t), true) if lost_at < t => (lost_at, false),
            (Some(t), _) => (t, true),
            (None, true) => (lost_at, false),
            (None, false) => (horizon, false),
        };
        records.push(StudentRecord {
            student_id: format!("S{:0width$}", i + 1),
            covariates: cov,
            time_observed,
            event,
        });
    }
    Cohort::new(records, horizon)
}

/// Per-semester dropout counts of a cohort, index 0 = semester 1.
pub fn dropout_histogram(cohort: &Cohort) -> Vec<usize> {
    let mut hist = vec![0; cohort.horizon() as usize];
    for r in cohort.records().iter().filter(|r| r.event) {
        hist[r.time_observed as usize - 1] += 1;
    }
    hist
}

/// Counts of levels generated for each categorical field, for summaries.
pub fn level_counts(cohort: &Cohort, field: CategoricalField) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in cohort.records() {
        *counts
            .entry(r.covariates.categorical(field).to_string())
            .or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, horizon: u32, h: f64, censor_rate: f64, seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            n_students: n,
            horizon,
            baseline_hazard: vec![h; horizon as usize],
            effects: Vec::new(),
            censor_rate,
            seed,
        }
    }

    #[test]
    fn null_effects_match_binomial_oracle() {
        let h: f64 = 0.15;
        let p = 1.0 - (-h).exp();
        let cohort = generate_synthetic(&flat(5000, 10, h, 0.0, 11)).unwrap();
        let hist = dropout_histogram(&cohort);
        let mut at_risk = cohort.len();
        for (t, &d) in hist.iter().enumerate() {
            if at_risk < 100 {
                break;
            }
            let frac = d as f64 / at_risk as f64;
            let sigma = (p * (1.0 - p) / at_risk as f64).sqrt();
            assert!(
                (frac - p).abs() <= 3.0 * sigma,
                "semester {}: {frac} vs {p} (3σ = {})",
                t + 1,
                3.0 * sigma
            );
            at_risk -= d;
        }
    }

    #[test]
    fn no_censoring_and_long_horizon_means_all_events() {
        let cohort = generate_synthetic(&flat(500, 200, 0.2, 0.0, 3)).unwrap();
        assert!(cohort.records().iter().all(|r| r.event));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut cfg = SyntheticConfig::reference_benchmark();
        cfg.n_students = 300;
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed += 1;
        assert_ne!(a, generate_synthetic(&cfg).unwrap());
    }

    #[test]
    fn infeasible_hazard_rejected() {
        let mut cfg = flat(50, 3, 1e300, 0.0, 1);
        cfg.effects.push(Effect {
            term: "hs_gpa".into(),
            coefficient: 50.0,
        });
        assert!(matches!(generate_synthetic(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = flat(10, 3, 0.1, 0.0, 1);
        cfg.baseline_hazard.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = flat(10, 3, 0.1, 1.0, 1);
        assert!(cfg.validate().is_err());
        cfg.censor_rate = 0.5;
        cfg.effects.push(Effect {
            term: "major=Astrology".into(),
            coefficient: 1.0,
        });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SyntheticConfig::reference_benchmark();
        let text = cfg.to_toml_string();
        assert_eq!(SyntheticConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn freshman_year_dominates_reference_dropouts() {
        let cohort = generate_synthetic(&SyntheticConfig::reference_benchmark()).unwrap();
        let hist = dropout_histogram(&cohort);
        let total: usize = hist.iter().sum();
        assert!(2 * (hist[0] + hist[1]) > total, "{hist:?}");
    }

    #[test]
    fn generated_values_respect_record_invariants() {
        let mut cfg = SyntheticConfig::reference_benchmark();
        cfg.n_students = 2000;
        let cohort = generate_synthetic(&cfg).unwrap();
        for r in cohort.records() {
            r.covariates.validate().unwrap();
            assert!(r.time_observed >= 1 && r.time_observed <= cfg.horizon);
        }
        for field in CategoricalField::ALL {
            assert_eq!(level_counts(&cohort, field).len(), levels(field).len());
        }
    }
}
