use std::collections::BTreeSet;

use attrition::dataio::{
    encode, generate_synthetic, read_cohort, split_train_test, write_cohort, ColumnSource, EncodingSpec,
    SyntheticConfig,
};
use proptest::prelude::*;

fn config(n: usize, seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        n_students: n,
        seed,
        ..SyntheticConfig::reference_benchmark()
    }
}

#[test]
fn csv_round_trip_preserves_records() {
    let cohort = generate_synthetic(&config(300, 1)).unwrap();
    let mut buf = Vec::new();
    write_cohort(&cohort, &mut buf).unwrap();
    let back = read_cohort(buf.as_slice(), cohort.horizon()).unwrap();
    assert_eq!(back, cohort);

    let mut again = Vec::new();
    write_cohort(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn generation_is_reproducible() {
    let a = generate_synthetic(&config(200, 8)).unwrap();
    let b = generate_synthetic(&config(200, 8)).unwrap();
    let c = generate_synthetic(&config(200, 9)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn destandardizing_recovers_raw_values() {
    let cohort = generate_synthetic(&config(400, 2)).unwrap();
    let spec = EncodingSpec::infer(cohort.records().iter().map(|r| &r.covariates), true);
    let data = encode(&cohort, &spec).unwrap();
    let raw = data.destandardized();
    for (i, r) in cohort.records().iter().enumerate() {
        let expected = data.features().raw_row(&r.covariates).unwrap();
        for (j, v) in expected.iter().enumerate() {
            assert!((raw[(i, j)] - v).abs() <= 1e-12 * v.abs().max(1.0), "({i}, {j})");
        }
    }
}

#[test]
fn each_categorical_field_sets_at_most_one_indicator() {
    let cohort = generate_synthetic(&config(400, 3)).unwrap();
    let spec = EncodingSpec::infer(cohort.records().iter().map(|r| &r.covariates), true);
    let data = encode(&cohort, &spec).unwrap();
    let columns = &data.features().columns;
    let fields: BTreeSet<String> = columns
        .iter()
        .filter_map(|c| match &c.source {
            ColumnSource::Indicator { field, .. } => Some(field.to_string()),
            _ => None,
        })
        .collect();
    assert!(!fields.is_empty());
    for field in fields {
        let cols: Vec<usize> = (0..columns.len())
            .filter(|&j| matches!(&columns[j].source, ColumnSource::Indicator { field: f, .. } if f.to_string() == field))
            .collect();
        for i in 0..data.nrows() {
            let s: f64 = cols.iter().map(|&j| data.x()[(i, j)]).sum();
            assert!(s == 0.0 || s == 1.0, "row {i}, field {field}: {s}");
        }
    }
}

#[test]
fn null_effects_reproduce_the_baseline_survival() {
    // No covariate effects and no loss to follow-up: the fraction still
    // enrolled after t semesters should track exp(−Σ h₀) within binomial noise.
    let n = 20_000;
    let cfg = SyntheticConfig {
        n_students: n,
        horizon: 6,
        baseline_hazard: vec![0.3, 0.2, 0.1, 0.1, 0.05, 0.05],
        effects: vec![],
        censor_rate: 0.0,
        seed: 77,
    };
    let cohort = generate_synthetic(&cfg).unwrap();
    let mut cumulative = 0.0;
    for t in 1..=6u32 {
        cumulative += cfg.baseline_hazard[t as usize - 1];
        let expected = (-cumulative).exp();
        let surviving = cohort
            .records()
            .iter()
            .filter(|r| !(r.event && r.time_observed <= t))
            .count() as f64
            / n as f64;
        let band = 4.0 * (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((surviving - expected).abs() <= band, "t={t}: {surviving} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_partitions_the_cohort(n in 10usize..200, fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let cohort = generate_synthetic(&config(n, seed)).unwrap();
        let (train, test) = split_train_test(&cohort, fraction, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), n);
        prop_assert!(!train.is_empty() && !test.is_empty());

        let ids = |c: &attrition::dataio::Cohort| -> BTreeSet<String> {
            c.records().iter().map(|r| r.student_id.clone()).collect()
        };
        let (a, b) = (ids(&train), ids(&test));
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(a.union(&b).count(), n);

        let expected_test = (fraction * n as f64).round().clamp(1.0, (n - 1) as f64) as usize;
        prop_assert_eq!(test.len(), expected_test);

        let again = split_train_test(&cohort, fraction, seed).unwrap();
        prop_assert_eq!(&again.0, &train);
        prop_assert_eq!(&again.1, &test);
    }
}
