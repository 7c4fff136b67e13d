//! Eigenphases of the propagator that straddle the 2 pi boundary are
//! unwrapped; an evolution time past the window is rejected.
//!
//! cargo run --release --example branch_cut

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tso_core::linalg::{ComplexMatrix, C64};
use tso_core::quantum::Hamiltonian;
use tso_core::random::random_unitary;
use tso_core::tso::{check_evolution_time, hamiltonian_from_unitary};

fn main() -> tso_core::Result<()> {
    let v = random_unitary(&mut ChaCha8Rng::seed_from_u64(2), 4);
    let spectrum = DVector::from_iterator(4, [0.0, 1.0, 2.0, 3.0].map(|x| C64::new(x, 0.0)));
    let h = Hamiltonian::new(&v * ComplexMatrix::from_diagonal(&spectrum) * v.adjoint())?;

    let t = 0.9;
    let report = check_evolution_time(&h, t, None);
    println!("t={t}: bound {:.4}, valid {}", report.bound, report.valid);
    let est = hamiltonian_from_unitary(&h.propagator(t), t, 0.0)?;
    println!(
        "wrapped {} phases, ||H_hat - H||_F = {:.2e}",
        est.gauge.wrapped,
        (&est.h_hat - h.matrix()).norm()
    );

    let t = 1.2;
    match hamiltonian_from_unitary(&h.propagator(t), t, 0.0) {
        Ok(_) => println!("t={t}: unexpectedly accepted"),
        Err(e) => println!("t={t}: {e} (exit code {})", e.exit_code()),
    }
    Ok(())
}
