//! Process data in the natural basis: the coefficient matrix `Lambda`, the
//! permutation `B` with `B vec(X) = vec(Lambda)`, and `D = unvec(B^dag vec(Lambda))`.
//!
//! Rows and columns of `Lambda` and `D` use the natural-basis ordering
//! `|j><k| -> j * d + k`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::quantum::NaturalBasis;

/// Row `m` holds the natural-basis coefficients of the image of basis element `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMatrix(pub ComplexMatrix);

impl LambdaMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `d`, the system dimension (Lambda is `d^2 x d^2`).
    pub fn system_dim(&self) -> usize {
        linalg::exact_sqrt(self.0.nrows()).expect("Lambda is d^2 x d^2")
    }
}

/// `D = unvec(B^dag vec(Lambda))`; equals `vec(G) vec(G)^dag` for exact
/// unitary-process data.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutedData(pub ComplexMatrix);

impl PermutedData {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Expansion coefficients `lambda_mn = Tr(rho_n^dag E(rho_m))`. Under the
/// natural basis this is a read-off: `lambda_{m, j d + k} = E(rho_m)[j, k]`.
pub fn compute_lambda(outputs: &[ComplexMatrix], basis: &NaturalBasis) -> Result<LambdaMatrix> {
    let d = basis.dim();
    let n = basis.len();
    if outputs.len() != n {
        return Err(Error::Shape(format!(
            "expected {n} outputs in natural-basis order, got {}",
            outputs.len()
        )));
    }
    if let Some(bad) = outputs.iter().find(|o| o.shape() != (d, d)) {
        return Err(Error::Shape(format!(
            "output of shape {:?} in a dimension-{d} basis",
            bad.shape()
        )));
    }
    Ok(LambdaMatrix(ComplexMatrix::from_fn(n, n, |m, col| {
        let (j, k) = basis.pair(col);
        outputs[m][(j, k)]
    })))
}

/// `B` as a permutation: row `r` of `B` has its single 1 in column `perm[r]`.
///
/// Row `r = n d^2 + m` addresses `vec(Lambda)` at `(m, n)`; column
/// `c = k d^2 + j` addresses `vec(X)` at `(j, k)`. With `m = (p, q)` and
/// `n = (s, t)`, `E_j rho_m E_k^dag` hits `rho_n` exactly when `j = (s, p)`
/// and `k = (t, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationB {
    d: usize,
    perm: Vec<usize>,
}

impl PermutationB {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `inv[c] = r` where `perm[r] = c`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (r, &c) in self.perm.iter().enumerate() {
            inv[c] = r;
        }
        inv
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        for &c in &self.perm {
            if c >= seen.len() || seen[c] {
                return false;
            }
            seen[c] = true;
        }
        true
    }

    /// `B v`
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        ComplexVector::from_iterator(v.len(), self.perm.iter().map(|&c| v[c]))
    }

    /// `B^dag v`
    pub fn apply_adjoint(&self, v: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(v.len());
        for (r, &c) in self.perm.iter().enumerate() {
            out[c] = v[r];
        }
        out
    }
}

pub fn b_permutation(d: usize) -> Result<PermutationB> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    let d2 = d * d;
    let mut perm = vec![0; d2 * d2];
    for s in 0..d {
        for t in 0..d {
            let n = s * d + t;
            for p in 0..d {
                for q in 0..d {
                    let m = p * d + q;
                    let j = s * d + p;
                    let k = t * d + q;
                    perm[n * d2 + m] = k * d2 + j;
                }
            }
        }
    }
    Ok(PermutationB { d, perm })
}

/// `D = unvec(B^dag vec(Lambda))`, a pure reordering of entries.
pub fn apply_b_dagger(lam: &LambdaMatrix, b: &PermutationB) -> Result<PermutedData> {
    let d2 = b.d * b.d;
    if lam.0.shape() != (d2, d2) {
        return Err(Error::Shape(format!(
            "Lambda is {}x{}, permutation expects {d2}x{d2}",
            lam.0.nrows(),
            lam.0.ncols()
        )));
    }
    let v = b.apply_adjoint(&linalg::vec(&lam.0));
    Ok(PermutedData(linalg::unvec(&v)?))
}

/// Write `lambda.txt` and `d.txt` in the matrix text format.
pub fn dump_intermediates(dir: &Path, lam: &LambdaMatrix, data: &PermutedData) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("lambda.txt"), linalg::matrix_to_string(&lam.0))?;
    std::fs::write(dir.join("d.txt"), linalg::matrix_to_string(&data.0))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, ONE};
    use crate::quantum::{natural_basis, pauli_x};
    use crate::random::{random_gaussian_matrix, random_unitary};
    use crate::selftest::dense_b;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exact_outputs(u: &ComplexMatrix, basis: &NaturalBasis) -> Vec<ComplexMatrix> {
        basis.elements().iter().map(|e| u * e * u.adjoint()).collect()
    }

    #[test]
    fn identity_process_gives_identity_lambda() {
        let basis = natural_basis(3).unwrap();
        let lam = compute_lambda(&basis.elements(), &basis).unwrap();
        assert_eq!(lam.0, ComplexMatrix::identity(9, 9));
    }

    #[test]
    fn lambda_for_pauli_x_conjugation() {
        let basis = natural_basis(2).unwrap();
        let x = pauli_x();
        let lam = compute_lambda(&exact_outputs(&x, &basis), &basis).unwrap();
        for m in 0..4 {
            let out = &x * basis.element(m) * &x;
            for n in 0..4 {
                assert_eq!(lam.0[(m, n)], linalg::inner(&basis.element(n), &out));
            }
        }
        // |0><1| -> |1><0|
        assert_eq!(lam.0[(1, 2)], ONE);
    }

    #[test]
    fn lambda_norm_for_unitary_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let basis = natural_basis(4).unwrap();
        let u = random_unitary(&mut rng, 4);
        let lam = compute_lambda(&exact_outputs(&u, &basis), &basis).unwrap();
        assert!((lam.0.norm_squared() - 16.0).abs() < 1e-10);
    }

    #[test]
    fn lambda_rejects_misaligned() {
        let basis = natural_basis(2).unwrap();
        assert!(compute_lambda(&basis.elements()[..3], &basis).is_err());
    }

    #[test]
    fn permutation_matches_dense_construction() {
        for d in 2..=4 {
            let b = b_permutation(d).unwrap();
            assert!(b.is_bijection());
            let dense = dense_b(d);
            let n = d.pow(4);
            for r in 0..n {
                for c in 0..n {
                    let expected = if b.perm()[r] == c { ONE } else { linalg::ZERO };
                    assert_eq!(dense[(r, c)], expected);
                }
            }
        }
    }

    #[test]
    fn permutation_inverse_round_trip() {
        let b = b_permutation(3).unwrap();
        let inv = b.inverse();
        for (r, &c) in b.perm().iter().enumerate() {
            assert_eq!(inv[c], r);
        }
    }

    #[test]
    fn identity_process_gives_rank_one_d() {
        let d = 2;
        let basis = natural_basis(d).unwrap();
        let lam = compute_lambda(&basis.elements(), &basis).unwrap();
        let data = apply_b_dagger(&lam, &b_permutation(d).unwrap()).unwrap();
        let g = linalg::vec(&ComplexMatrix::identity(d, d));
        assert_eq!(data.0, linalg::outer(&g, &g));
        assert_eq!(data.0.trace(), ONE * d as f64);
    }

    #[test]
    fn b_dagger_matches_dense_and_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for d in 2..=4 {
            let b = b_permutation(d).unwrap();
            let dense = dense_b(d);
            let lam = LambdaMatrix(random_gaussian_matrix(&mut rng, d * d, d * d));
            let data = apply_b_dagger(&lam, &b).unwrap();
            let oracle = linalg::unvec(&(dense.adjoint() * linalg::vec(&lam.0))).unwrap();
            assert_eq!(data.0, oracle);
            // same entries, reordered; the norm differs only by summation order
            assert!((data.0.norm() - lam.0.norm()).abs() <= 1e-14 * lam.0.norm());

            let pert = LambdaMatrix(&lam.0 + random_gaussian_matrix(&mut rng, d * d, d * d).scale(1e-3));
            let dp = apply_b_dagger(&pert, &b).unwrap();
            let (a, e) = ((&dp.0 - &data.0).norm(), (&pert.0 - &lam.0).norm());
            assert!((a - e).abs() <= 1e-14 * e);
        }
    }

    #[test]
    fn b_dagger_dimension_mismatch() {
        let lam = LambdaMatrix(ComplexMatrix::zeros(4, 4));
        assert!(apply_b_dagger(&lam, &b_permutation(3).unwrap()).is_err());
    }

    #[test]
    fn exact_unitary_data_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let d = 3;
        let basis = natural_basis(d).unwrap();
        let u = random_unitary(&mut rng, d);
        let lam = compute_lambda(&exact_outputs(&u, &basis), &basis).unwrap();
        let data = apply_b_dagger(&lam, &b_permutation(d).unwrap()).unwrap();
        // process rho -> G^T rho G^* with G = U^T
        let g = linalg::vec(&u.transpose());
        assert!((&data.0 - linalg::outer(&g, &g)).norm() < 1e-12);
        let herm = &data.0 + data.0.adjoint();
        let top = linalg::eig_hermitian(&herm).unwrap().values[0];
        assert!((top - 2.0 * d as f64).abs() < 1e-9);
    }
}
