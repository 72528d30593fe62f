mod common;

use attrition::cox::{baseline_hazard, fit, log_partial_likelihood, CoxModel, FitOptions};
use attrition::dataio::{encode, DesignMatrix, NumericField};
use attrition::ModelDocument;
use common::{design, recovery_data, recovery_spec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recovers_true_coefficients() {
    let (cohort, data, truth) = recovery_data();
    let censored = 1.0 - cohort.n_events() as f64 / cohort.len() as f64;
    assert!((0.15..0.25).contains(&censored), "censored fraction {censored}");

    let model = fit(&data, &FitOptions::default()).unwrap();
    let se = &model.diagnostics().standard_errors;
    for (k, (&b, &t)) in model.beta().iter().zip(&truth).enumerate() {
        assert!((b - t).abs() <= 0.1, "beta[{k}] = {b}, truth {t}");
        assert!((b - t).abs() <= 3.0 * se[k], "beta[{k}] = {b}, truth {t}, se {}", se[k]);
    }
}

#[test]
fn permuted_covariate_has_no_effect() {
    let (cohort, _, _) = recovery_data();
    let mut records = cohort.records().to_vec();
    let mut gpas: Vec<f64> = records.iter().map(|r| r.covariates.hs_gpa).collect();
    gpas.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    for (r, g) in records.iter_mut().zip(gpas) {
        r.covariates.hs_gpa = g;
    }
    let shuffled = attrition::dataio::Cohort::new(records, cohort.horizon()).unwrap();
    let spec = recovery_spec(&[NumericField::HsGpa]);
    let model = fit(&encode(&shuffled, &spec).unwrap(), &FitOptions::default()).unwrap();
    let se = model.diagnostics().standard_errors[0];
    assert!(model.beta()[0].abs() < 3.0 * se, "beta {} se {se}", model.beta()[0]);
}

#[test]
fn maximum_beats_the_null_model() {
    let (_, data, _) = recovery_data();
    let model = fit(&data, &FitOptions::default()).unwrap();
    let null = log_partial_likelihood(&data, &vec![0.0; data.ncols()]).unwrap();
    assert!(model.diagnostics().log_likelihood >= null);
}

fn raw_rows(data: &DesignMatrix) -> Vec<Vec<f64>> {
    let x = data.x();
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

#[test]
fn rescaling_a_column_rescales_its_coefficient() {
    let (_, data, _) = recovery_data();
    let rows = raw_rows(&data);
    let scaled_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r[1] *= 10.0;
            r
        })
        .collect();
    let base = fit(&design(&rows, data.times(), data.events()), &FitOptions::default()).unwrap();
    let scaled = fit(&design(&scaled_rows, data.times(), data.events()), &FitOptions::default()).unwrap();
    for k in 0..rows[0].len() {
        let expected = if k == 1 { base.beta()[k] * 0.1 } else { base.beta()[k] };
        assert!((scaled.beta()[k] - expected).abs() <= 1e-6, "column {k}");
    }
    for (r, s) in rows.iter().zip(&scaled_rows) {
        assert_eq!(
            base.predict_scaled(r, 0.5, 80).unwrap(),
            scaled.predict_scaled(s, 0.5, 80).unwrap()
        );
    }
}

#[test]
fn survival_curves_are_valid_for_random_subjects() {
    let (_, data, _) = recovery_data();
    let model = fit(&data, &FitOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut violations = 0;
    for _ in 0..1000 {
        let mut row: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
        row.push(f64::from(rng.random_range(0..=1u8)));
        let curve = model.survival_curve_scaled(&row).unwrap();
        let pts = curve.points();
        violations += usize::from(pts[0] != (0, 1.0));
        violations += pts.iter().filter(|(_, s)| !(0.0..=1.0).contains(s)).count();
        violations += pts.windows(2).filter(|w| w[1].1 > w[0].1).count();
    }
    assert_eq!(violations, 0);
}

#[test]
fn baseline_at_zero_is_deaths_over_risk_set() {
    // Times 1, 2, 2, 3, 4, 5; the subject at 3 and the one at 5 are censored.
    let rows: Vec<Vec<f64>> = [0.3, -1.2, 0.8, 2.0, -0.5, 1.1].iter().map(|&v| vec![v]).collect();
    let data = design(&rows, &[1, 2, 2, 3, 4, 5], &[true, true, true, false, true, false]);
    let table = baseline_hazard(&data, &[0.0]).unwrap();
    let got: Vec<(u32, f64)> = table.steps().iter().map(|s| (s.time, s.increment)).collect();
    assert_eq!(got, vec![(1, 1.0 / 6.0), (2, 2.0 / 5.0), (4, 1.0 / 2.0)]);
}

#[test]
fn json_round_trip_predicts_bit_identically() {
    let (cohort, data, _) = recovery_data();
    let model = fit(&data, &FitOptions::default()).unwrap();
    let json = ModelDocument::Cox(model.clone()).to_json().unwrap();
    let back = match ModelDocument::from_json(&json).unwrap() {
        ModelDocument::Cox(m) => m,
        other => panic!("wrong kind {:?}", other.kind()),
    };
    assert_eq!(back, model);
    for r in cohort.records().iter().take(200) {
        let a = model.survival_curve(&r.covariates).unwrap();
        let b = back.survival_curve(&r.covariates).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            model.predict_dropout_semester(&r.covariates, 0.5, 80).unwrap(),
            back.predict_dropout_semester(&r.covariates, 0.5, 80).unwrap()
        );
    }
}

#[test]
fn tampered_document_is_rejected() {
    let (_, data, _) = recovery_data();
    let model = fit(&data, &FitOptions::default()).unwrap();
    let json = serde_json::to_string(&model).unwrap();
    let tampered = json.replacen("hs_gpa", "gpa", 1);
    assert!(serde_json::from_str::<CoxModel>(&tampered).is_err());
}
