//! The data-processing half step by step: rank-one fit, unitary projection,
//! Kraus operator and matrix logarithm, on noisy process data.
//!
//! cargo run --release --example tso_steps

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tso_core::linalg::unitarity_defect;
use tso_core::process::{apply_b_dagger, b_permutation, compute_lambda, LambdaMatrix};
use tso_core::quantum::{natural_basis, Hamiltonian};
use tso_core::random::random_gaussian_matrix;
use tso_core::tso::{hamiltonian_from_unitary, kraus_from_g, solve_rank_one, solve_unitary};

fn main() -> tso_core::Result<()> {
    let h = Hamiltonian::two_qubit_benchmark();
    let t = 0.1;
    let u = h.propagator(t);
    let basis = natural_basis(4)?;
    let outputs: Vec<_> = basis.elements().iter().map(|e| &u * e * u.adjoint()).collect();
    let exact = compute_lambda(&outputs, &basis)?;
    let noise = random_gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(5), 16, 16).scale(1e-3);
    let lam = LambdaMatrix(exact.matrix() + noise);

    let data = apply_b_dagger(&lam, &b_permutation(4)?)?;
    let rank_one = solve_rank_one(&data)?;
    println!(
        "alpha1 = {:.5} (2d = 8), residual {:.3e}",
        rank_one.alpha1, rank_one.residual
    );
    let unitary = solve_unitary(&rank_one)?;
    println!("G unitarity defect {:.1e}", unitarity_defect(&unitary.g_hat));
    let a = kraus_from_g(&unitary);
    let est = hamiltonian_from_unitary(&a, t, h.smallest_eigenvalue())?;
    println!(
        "phase offset {:.4}, wrapped {}",
        est.gauge.phase_offset, est.gauge.wrapped
    );
    println!("||H_hat - H||_F = {:.3e}", (&est.h_hat - h.matrix()).norm());
    Ok(())
}
