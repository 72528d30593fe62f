use serde::{Deserialize, Serialize};

use super::baseline::BaselineHazardTable;
use crate::error::{Error, Result};

/// Right-continuous step function S(t | x) over the baseline's event times,
/// starting at S(0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    points: Vec<(u32, f64)>,
}

/// Predicted dropout semester and whether the curve never crossed the
/// threshold within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropoutPrediction {
    pub semester: u32,
    pub beyond_horizon: bool,
}

impl SurvivalCurve {
    /// S(t | x) = exp(−H₀(t) · exp(βx)).
    pub fn from_baseline(baseline: &BaselineHazardTable, linear_predictor: f64) -> Self {
        let risk = linear_predictor.exp();
        let mut points = Vec::with_capacity(baseline.steps().len() + 1);
        points.push((0, 1.0));
        points.extend(
            baseline
                .cumulative()
                .into_iter()
                .map(|(t, h)| (t, (-h * risk).exp())),
        );
        SurvivalCurve { points }
    }

    /// Builds a curve from explicit `(t, S)` pairs; `(0, 1)` is prepended.
    pub fn from_points(points: Vec<(u32, f64)>) -> Result<Self> {
        let mut all = vec![(0, 1.0)];
        all.extend(points);
        if all.windows(2).any(|w| w[0].0 >= w[1].0 || w[1].1 > w[0].1) {
            return Err(Error::Validation(
                "curve times must increase from 1 and values must not increase".into(),
            ));
        }
        if all.iter().any(|&(_, s)| !(0.0..=1.0).contains(&s)) {
            return Err(Error::Validation("survival values must lie in [0, 1]".into()));
        }
        Ok(SurvivalCurve { points: all })
    }

    pub fn points(&self) -> &[(u32, f64)] {
        &self.points
    }

    /// S(t), holding the last value between steps.
    pub fn at(&self, t: u32) -> f64 {
        self.points
            .iter()
            .take_while(|(pt, _)| *pt <= t)
            .last()
            .map_or(1.0, |&(_, s)| s)
    }

    /// First event time with S(t) ≤ threshold; `(horizon, true)` when there is
    /// none at or before the horizon.
    pub fn first_crossing(&self, threshold: f64, horizon: u32) -> Result<DropoutPrediction> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Argument(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        let hit = self
            .points
            .iter()
            .skip(1)
            .take_while(|(t, _)| *t <= horizon)
            .find(|(_, s)| *s <= threshold);
        Ok(match hit {
            Some(&(t, _)) => DropoutPrediction {
                semester: t,
                beyond_horizon: false,
            },
            None => DropoutPrediction {
                semester: horizon,
                beyond_horizon: true,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cox::baseline::HazardStep;
    use approx::assert_relative_eq;

    fn table(steps: &[(u32, f64)]) -> BaselineHazardTable {
        BaselineHazardTable::new(
            steps
                .iter()
                .map(|&(time, increment)| HazardStep { time, increment })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_predictor_is_baseline_survival() {
        let b = table(&[(1, 0.2), (3, 0.1), (4, 0.4)]);
        let c = SurvivalCurve::from_baseline(&b, 0.0);
        for (t, h) in b.cumulative() {
            assert_eq!(c.at(t), (-h).exp());
        }
        assert_eq!(c.at(0), 1.0);
        assert_eq!(c.at(2), c.at(1));
    }

    #[test]
    fn hand_exponentiation() {
        let b = table(&[(1, 0.25), (2, 0.5)]);
        let c = SurvivalCurve::from_baseline(&b, 2f64.ln());
        assert_relative_eq!(c.at(2), (-1.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(c.at(2), 0.22313016014842982, epsilon = 1e-12);
    }

    #[test]
    fn higher_risk_lies_below() {
        let b = table(&[(1, 0.1), (2, 0.3), (5, 0.2)]);
        let base = SurvivalCurve::from_baseline(&b, 0.0);
        let risky = SurvivalCurve::from_baseline(&b, 3.0);
        for ((_, s0), (_, s1)) in base.points().iter().zip(risky.points()).skip(1) {
            assert!(s1 < s0);
        }
    }

    #[test]
    fn crossing_rules() {
        let c = SurvivalCurve::from_points(vec![(1, 0.9), (2, 0.6), (3, 0.45)]).unwrap();
        assert_eq!(
            c.first_crossing(0.5, 14).unwrap(),
            DropoutPrediction { semester: 3, beyond_horizon: false }
        );
        let flat = SurvivalCurve::from_points(vec![(1, 0.9), (2, 0.8)]).unwrap();
        assert_eq!(
            flat.first_crossing(0.5, 14).unwrap(),
            DropoutPrediction { semester: 14, beyond_horizon: true }
        );
        assert_eq!(c.first_crossing(0.999, 14).unwrap().semester, 1);
        // A crossing after the horizon does not count.
        assert_eq!(
            c.first_crossing(0.5, 2).unwrap(),
            DropoutPrediction { semester: 2, beyond_horizon: true }
        );
        assert!(c.first_crossing(1.0, 14).is_err());
        assert!(c.first_crossing(0.0, 14).is_err());
    }

    #[test]
    fn rejects_increasing_points() {
        assert!(SurvivalCurve::from_points(vec![(1, 0.5), (2, 0.6)]).is_err());
        assert!(SurvivalCurve::from_points(vec![(2, 0.5), (1, 0.4)]).is_err());
    }
}
