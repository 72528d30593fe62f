use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::likelihood::SurvivalView;
use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardStep {
    pub time: u32,
    pub increment: f64,
}

/// Breslow baseline hazard increments at the distinct event times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HazardStep>", into = "Vec<HazardStep>")]
pub struct BaselineHazardTable {
    steps: Vec<HazardStep>,
}

impl BaselineHazardTable {
    pub fn new(steps: Vec<HazardStep>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Validation("baseline hazard table is empty".into()));
        }
        if steps.windows(2).any(|w| w[0].time >= w[1].time) {
            return Err(Error::Validation(
                "baseline hazard times must be strictly increasing".into(),
            ));
        }
        if steps
            .iter()
            .any(|s| !(s.increment.is_finite() && s.increment > 0.0) || s.time < 1)
        {
            return Err(Error::Validation(
                "baseline hazard increments must be positive and finite".into(),
            ));
        }
        Ok(BaselineHazardTable { steps })
    }

    pub fn steps(&self) -> &[HazardStep] {
        &self.steps
    }

    pub fn times(&self) -> impl Iterator<Item = u32> + '_ {
        self.steps.iter().map(|s| s.time)
    }

    /// H₀(t): sum of increments at event times ≤ t.
    pub fn cumulative_at(&self, t: u32) -> f64 {
        self.steps
            .iter()
            .take_while(|s| s.time <= t)
            .map(|s| s.increment)
            .sum()
    }

    /// (time, H₀(time)) at every step.
    pub fn cumulative(&self) -> Vec<(u32, f64)> {
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += s.increment;
                (s.time, acc)
            })
            .collect()
    }
}

impl TryFrom<Vec<HazardStep>> for BaselineHazardTable {
    type Error = Error;

    fn try_from(steps: Vec<HazardStep>) -> Result<Self> {
        Self::new(steps)
    }
}

impl From<BaselineHazardTable> for Vec<HazardStep> {
    fn from(t: BaselineHazardTable) -> Self {
        t.steps
    }
}

pub(crate) fn baseline_from_view(view: &SurvivalView<'_>, beta: &[f64]) -> Result<BaselineHazardTable> {
    if beta.len() != view.x.ncols() || beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Argument("coefficients must be finite, one per column".into()));
    }
    if !view.events.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    let eta = view.x * DVector::from_column_slice(beta);
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let order = super::likelihood::descending_order(view.times);
    let n = order.len();
    let mut steps = Vec::new();
    let mut risk = 0.0;
    let mut start = 0;
    while start < n {
        let t = view.times[order[start]];
        let mut deaths = 0usize;
        let mut end = start;
        while end < n && view.times[order[end]] == t {
            let i = order[end];
            risk += (eta[i] - shift).exp();
            deaths += usize::from(view.events[i]);
            end += 1;
        }
        if deaths > 0 {
            // Plain division keeps d / |R| exact when every η is zero; the log
            // form only matters when exp(−shift) leaves the f64 range.
            let mut increment = deaths as f64 / risk * (-shift).exp();
            if !increment.is_finite() || increment == 0.0 {
                increment = ((deaths as f64).ln() - shift - risk.ln()).exp();
            }
            steps.push(HazardStep { time: t, increment });
        }
        start = end;
    }
    steps.reverse();
    BaselineHazardTable::new(steps)
}

/// ĥ₀(t₍ᵢ₎) = dᵢ / Σ_{j: tⱼ ≥ t₍ᵢ₎} exp(βxⱼ) at every distinct event time.
pub fn baseline_hazard(data: &DesignMatrix, beta: &[f64]) -> Result<BaselineHazardTable> {
    baseline_from_view(&data.into(), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn distinct_times_at_zero() {
        let d = DesignMatrix::from_rows(
            &[vec![0.1], vec![0.7], vec![-0.3], vec![2.0]],
            &[1, 2, 3, 4],
            &[true; 4],
        )
        .unwrap();
        let table = baseline_hazard(&d, &[0.0]).unwrap();
        let got: Vec<f64> = table.steps().iter().map(|s| s.increment).collect();
        for (g, e) in got.iter().zip([0.25, 1.0 / 3.0, 0.5, 1.0]) {
            assert_relative_eq!(*g, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn tied_events_with_censoring() {
        // t=1: two events, risk set 4 → 2/4. t=2: one event, one censored,
        // risk set 2 → 1/2.
        let d = DesignMatrix::from_rows(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            &[1, 1, 2, 2],
            &[true, true, true, false],
        )
        .unwrap();
        let table = baseline_hazard(&d, &[0.0]).unwrap();
        assert_eq!(table.times().collect::<Vec<_>>(), vec![1, 2]);
        assert_relative_eq!(table.steps()[0].increment, 0.5, epsilon = 1e-15);
        assert_relative_eq!(table.steps()[1].increment, 0.5, epsilon = 1e-15);
        assert_relative_eq!(table.cumulative_at(1), 0.5, epsilon = 1e-15);
        assert_relative_eq!(table.cumulative_at(5), 1.0, epsilon = 1e-15);
        assert_eq!(table.cumulative_at(0), 0.0);
    }

    #[test]
    fn table_invariants_enforced() {
        let step = |time, increment| HazardStep { time, increment };
        assert!(BaselineHazardTable::new(vec![step(2, 0.1), step(2, 0.1)]).is_err());
        assert!(BaselineHazardTable::new(vec![step(1, 0.0)]).is_err());
        assert!(BaselineHazardTable::new(vec![step(1, 0.1), step(3, 0.2)]).is_ok());
        let json = r#"[{"time":3,"increment":0.1},{"time":1,"increment":0.2}]"#;
        assert!(serde_json::from_str::<BaselineHazardTable>(json).is_err());
    }
}
