//! MSE against evolution time at fixed shots. Every grid time is checked
//! against the window before anything is sampled.
//!
//! cargo run --release --example time_sweep

use tso_core::experiment::{sweep_time, ExperimentConfig, HamiltonianSource, SweepAxis};

fn main() -> tso_core::Result<()> {
    let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 729_000)
        .with_repetitions(10)
        .with_workers(4)
        .with_sweep(SweepAxis::Time(vec![0.01, 0.02, 0.04, 0.08, 0.16]));
    let result = sweep_time(&cfg)?;
    for p in &result.points {
        println!("t={:<5} mean MSE {:.3e}", p.x, p.mean_mse);
    }
    println!("{}", result.summary());

    let bad = cfg.with_sweep(SweepAxis::Time(vec![0.1, 0.2, 0.3]));
    println!("grid reaching t=0.3: {}", sweep_time(&bad).unwrap_err());
    Ok(())
}
