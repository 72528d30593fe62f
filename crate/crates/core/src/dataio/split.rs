use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::record::Cohort;
use crate::error::{Error, Result};

/// Record positions split into (events, censored), each shuffled by `rng`.
pub(crate) fn shuffled_strata(cohort: &Cohort, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut events, mut censored): (Vec<usize>, Vec<usize>) =
        (0..cohort.len()).partition(|&i| cohort.records()[i].event);
    events.shuffle(rng);
    censored.shuffle(rng);
    (events, censored)
}

/// Event-stratified train/test partition. The test side gets
/// `round(test_fraction · n)` records (kept within `1..n`), apportioned to the
/// strata by largest remainder.
pub fn split_train_test(cohort: &Cohort, test_fraction: f64, seed: u64) -> Result<(Cohort, Cohort)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = cohort.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "cannot split a cohort of {n} record(s) into two nonempty parts"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (events, censored) = shuffled_strata(cohort, &mut rng);

    let total = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let quota = |size: usize| test_fraction * size as f64;
    let mut take = [quota(events.len()).floor() as usize, quota(censored.len()).floor() as usize];
    let mut remainders = [
        quota(events.len()) - take[0] as f64,
        quota(censored.len()) - take[1] as f64,
    ];
    let sizes = [events.len(), censored.len()];
    while take[0] + take[1] < total {
        // Largest remainder first, events on ties; then any stratum with room.
        let slot = if remainders[1] > remainders[0] { 1 } else { 0 };
        let slot = if take[slot] < sizes[slot] { slot } else { 1 - slot };
        take[slot] += 1;
        remainders[slot] = f64::NEG_INFINITY;
    }
    while take[0] + take[1] > total {
        let s = if take[0] >= take[1] { 0 } else { 1 };
        take[s] -= 1;
    }

    let mut test: Vec<usize> = events[..take[0]]
        .iter()
        .chain(&censored[..take[1]])
        .copied()
        .collect();
    let mut train: Vec<usize> = events[take[0]..]
        .iter()
        .chain(&censored[take[1]..])
        .copied()
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((cohort.subset(&train), cohort.subset(&test)))
}
