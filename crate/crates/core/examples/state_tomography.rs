//! Linear-regression state tomography with Pauli-cube measurements. The
//! squared error falls off as 1/N.
//!
//! cargo run --release --example state_tomography

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tso_core::quantum::DensityMatrix;
use tso_core::random::{derive_seed, random_density};
use tso_core::tomography::{cube_plan_with_total, project_to_physical, simulate_counts, LinearRegressionEstimator};

fn main() -> tso_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = DensityMatrix::new(random_density(&mut rng, 4))?;
    println!("{:>9}  {:>12}  {:>12}", "N", "raw MSE", "projected MSE");
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let plan = cube_plan_with_total(2, n)?;
        let estimator = LinearRegressionEstimator::new(&plan)?;
        let (mut raw, mut proj) = (0.0, 0.0);
        let reps = 20;
        for r in 0..reps {
            let counts = simulate_counts(&rho, &plan, derive_seed(11, &[n, r]))?;
            let est = estimator.estimate(&counts)?;
            raw += (&est.matrix - rho.matrix()).norm_squared();
            proj += (project_to_physical(&est)?.matrix() - rho.matrix()).norm_squared();
        }
        println!("{n:>9}  {:>12.3e}  {:>12.3e}", raw / reps as f64, proj / reps as f64);
    }
    Ok(())
}
