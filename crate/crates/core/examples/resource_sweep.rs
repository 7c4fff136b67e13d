//! MSE against total resources for the benchmark Hamiltonian, with the fitted
//! log-log slope. Writes the per-point table to stdout as CSV.
//!
//! cargo run --release --example resource_sweep

use tso_core::experiment::{sweep_resources, ExperimentConfig, HamiltonianSource, SweepAxis};

fn main() -> tso_core::Result<()> {
    let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 1000)
        .with_repetitions(10)
        .with_workers(4)
        .with_sweep(SweepAxis::Shots(vec![1_000, 10_000, 100_000, 1_000_000]));
    let result = sweep_resources(&cfg)?;
    result.write_points_csv(std::io::stdout().lock())?;
    println!("{}", result.summary());
    Ok(())
}
