//! MSE against qubit count for the tensor-power fixture at t = 0.01.
//!
//! cargo run --release --example qubit_sweep

use tso_core::experiment::{sweep_qubits, ExperimentConfig, HamiltonianSource, SweepAxis};
use tso_core::quantum::Hamiltonian;

fn main() -> tso_core::Result<()> {
    for n in 1..=5 {
        println!(
            "{n} qubits: spectral spread {:.2}",
            Hamiltonian::tensor_power_fixture(n)?.spectral_spread()
        );
    }
    let cfg = ExperimentConfig::new(HamiltonianSource::TensorPower { nqubits: 1 }, 0.01, 729_000)
        .with_repetitions(10)
        .with_workers(4)
        .with_sweep(SweepAxis::Qubits(vec![1, 2, 3]));
    let result = sweep_qubits(&cfg)?;
    for p in &result.points {
        println!(
            "N_q={} mean MSE {:.3e} (std of log10 {:.3})",
            p.grid_value, p.mean_mse, p.std_log10_mse
        );
    }
    println!("{}", result.summary());
    Ok(())
}
