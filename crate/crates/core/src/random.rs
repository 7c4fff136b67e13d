//! Random matrix fixtures and the seed-derivation scheme.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

/// Matrix with i.i.d. standard complex Gaussian entries (unit variance per
/// real and imaginary part).
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// GUE-style Hermitian matrix `(A + A^dag) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let a = random_gaussian_matrix(rng, d, d);
    (&a + a.adjoint()).scale(0.5)
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let a = random_gaussian_matrix(rng, d, d);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Random pure state `|psi><psi|`.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let v = random_gaussian_matrix(rng, d, 1);
    let v = v.scale(1.0 / v.norm());
    &v * v.adjoint()
}

/// Random full-rank density matrix `A A^dag / Tr(A A^dag)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let a = random_gaussian_matrix(rng, d, d);
    let p = &a * a.adjoint();
    let tr = p.trace().re;
    p.scale(1.0 / tr)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a counter path.
///
/// `derive_seed(root, &[repetition, probe, setting])` folds each counter into
/// the running state with [`mix64`], so sibling paths never share a stream.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(root), |acc, &k| {
        mix64(acc ^ mix64(k.wrapping_add(0x5851_F42D_4C95_7F2D)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_fixture_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [1, 2, 7] {
            assert!(unitarity_defect(&random_unitary(&mut rng, d)) < 1e-12);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(42, &[0, 1, 2]);
        let b = derive_seed(42, &[0, 2, 1]);
        let c = derive_seed(42, &[0, 1, 2]);
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(derive_seed(42, &[]), derive_seed(43, &[]));
    }
}
