use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataio::{shuffled_strata, Cohort};
use crate::error::{Error, Result};

/// Splits record positions into `k` folds stratified on the event flag.
///
/// Each stratum is shuffled and dealt round-robin; the censored stratum picks
/// up dealing where the events stratum stopped, so fold sizes differ by at
/// most one overall as well as within each stratum. Fold contents are sorted.
pub fn stratified_kfold(cohort: &Cohort, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Argument(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (events, censored) = shuffled_strata(cohort, &mut rng);
    for (name, stratum) in [("events", &events), ("censored", &censored)] {
        if !stratum.is_empty() && stratum.len() < k {
            return Err(Error::StratumTooSmall {
                stratum: name,
                size: stratum.len(),
                k,
            });
        }
    }
    if events.is_empty() {
        return Err(Error::NoEvents);
    }

    let mut folds = vec![Vec::new(); k];
    for (slot, &i) in events.iter().chain(&censored).enumerate() {
        folds[slot % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}
