//! For a unitary process, reordering the entries of Lambda with the
//! permutation B yields the rank-one matrix vec(G) vec(G)^dag.
//!
//! cargo run --release --example permutation_b

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tso_core::linalg::{self, eig_hermitian};
use tso_core::process::{apply_b_dagger, b_permutation, compute_lambda};
use tso_core::quantum::natural_basis;
use tso_core::random::random_unitary;
use tso_core::selftest::dense_b;

fn main() -> tso_core::Result<()> {
    let d = 3;
    let b = b_permutation(d)?;
    println!("perm for d={d} (first 12 rows): {:?}", &b.perm()[..12]);
    let dense = dense_b(d);
    let agrees = (0..d.pow(4)).all(|r| dense[(r, b.perm()[r])] == linalg::ONE);
    println!("dense construction agrees with the permutation: {agrees}");

    let u = random_unitary(&mut ChaCha8Rng::seed_from_u64(1), d);
    let basis = natural_basis(d)?;
    let outputs: Vec<_> = basis.elements().iter().map(|e| &u * e * u.adjoint()).collect();
    let lam = compute_lambda(&outputs, &basis)?;
    let data = apply_b_dagger(&lam, &b)?;
    let herm = data.matrix() + data.matrix().adjoint();
    let eig = eig_hermitian(&herm)?;
    println!("spectrum of D + D^dag: {:.3?}", eig.values);
    let g = linalg::vec(&u.transpose());
    println!(
        "||D - vec(U^T) vec(U^T)^dag|| = {:.2e}",
        (data.matrix() - linalg::outer(&g, &g)).norm()
    );
    Ok(())
}
