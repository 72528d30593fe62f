//! Generates the reference cohort, holds out 20% and prints the benchmark table.

use std::time::Instant;

use attrition::dataio::{generate_synthetic, split_train_test, SyntheticConfig};
use attrition::eval::{run_benchmark, BenchmarkConfig};

fn main() -> attrition::Result<()> {
    let config = SyntheticConfig::reference_benchmark();
    let cohort = generate_synthetic(&config)?;
    let censored = 1.0 - cohort.n_events() as f64 / cohort.len() as f64;
    println!("n = {}, censored fraction {censored:.3}", cohort.len());

    let (train, test) = split_train_test(&cohort, 0.2, config.seed)?;
    let started = Instant::now();
    let bench = BenchmarkConfig {
        seed: config.seed,
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&train, &test, &bench)?;
    print!("{}", report.to_text());
    println!("elapsed {:.2?}", started.elapsed());
    Ok(())
}
