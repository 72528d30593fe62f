use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Predicted vs. actual dropout semesters for event-observed subjects.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    predicted: Vec<f64>,
    actual: Vec<u32>,
}

impl PredictionSet {
    pub fn new(predicted: Vec<f64>, actual: Vec<u32>) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::Argument(format!(
                "{} predictions for {} actual values",
                predicted.len(),
                actual.len()
            )));
        }
        let mut set = PredictionSet::default();
        for (p, a) in predicted.into_iter().zip(actual) {
            set.push(p, a)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, predicted: f64, actual: u32) -> Result<()> {
        if !predicted.is_finite() {
            return Err(Error::Argument(format!("prediction {predicted} is not finite")));
        }
        if actual < 1 {
            return Err(Error::Argument("actual semester must be ≥ 1".into()));
        }
        self.predicted.push(predicted);
        self.actual.push(actual);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actual.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.predicted.iter().copied().zip(self.actual.iter().copied())
    }
}

/// Counts of strictly under-, strictly over- and exactly-predicted semesters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBalance {
    pub under: usize,
    pub over: usize,
    pub exact: usize,
}

impl ErrorBalance {
    /// Share of errors that are underestimates; `None` when there are no errors.
    pub fn uper(&self) -> Option<f64> {
        let wrong = self.under + self.over;
        (wrong > 0).then(|| self.under as f64 / wrong as f64)
    }

    /// `1 − uper`, so the two always add to exactly one.
    pub fn oper(&self) -> Option<f64> {
        self.uper().map(|u| 1.0 - u)
    }
}

pub fn mae(preds: &PredictionSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyPredictions);
    }
    let total: f64 = preds.iter().map(|(p, a)| (p - f64::from(a)).abs()).sum();
    Ok(total / preds.len() as f64)
}

pub fn error_balance(preds: &PredictionSet) -> Result<ErrorBalance> {
    if preds.is_empty() {
        return Err(Error::EmptyPredictions);
    }
    let mut b = ErrorBalance::default();
    for (p, a) in preds.iter() {
        let a = f64::from(a);
        if p < a {
            b.under += 1;
        } else if p > a {
            b.over += 1;
        } else {
            b.exact += 1;
        }
    }
    Ok(b)
}

pub fn uper(preds: &PredictionSet) -> Result<Option<f64>> {
    Ok(error_balance(preds)?.uper())
}

pub fn oper(preds: &PredictionSet) -> Result<Option<f64>> {
    Ok(error_balance(preds)?.oper())
}
