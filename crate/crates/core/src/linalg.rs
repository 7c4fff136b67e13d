//! Dense complex linear algebra.
//!
//! Matrices are `nalgebra` dense matrices of `Complex<f64>`, stored
//! column-major. Vectorization is column stacking everywhere in this crate:
//! entry `(i, j)` of an `m x n` matrix lands at position `j * m + i` of
//! `vec(A)` (0-based), so `vec(|a><b|) = conj(|b>) (x) |a>`.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default numerical tolerances. Every routine that checks a structural
/// property has a `*_tol` variant taking an explicit [`Tolerances`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity threshold: `||A - A^dag|| <= hermitian * max(1, ||A||)`.
    pub hermitian: f64,
    /// Absolute unitarity threshold on `||U^dag U - I||`.
    pub unitary: f64,
    /// Relative gap below which eigenvalues of the Hermitian part of a
    /// unitary are treated as one cluster.
    pub cluster_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-8,
            unitary: 1e-6,
            cluster_gap: 1e-8,
        }
    }
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_finite(a: &ComplexMatrix, what: &'static str) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if a.nrows() == a.ncols() && a.nrows() > 0 {
        Ok(a.nrows())
    } else {
        Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

/// Column-stacking vectorization.
pub fn vec(a: &ComplexMatrix) -> ComplexVector {
    // nalgebra storage is already column-major.
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`] for square shapes.
pub fn unvec(v: &ComplexVector) -> Result<ComplexMatrix> {
    let d = exact_sqrt(v.len())
        .ok_or_else(|| Error::Shape(format!("vector length {} is not a perfect square", v.len())))?;
    Ok(ComplexMatrix::from_column_slice(d, d, v.as_slice()))
}

pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n && r > 0).then_some(r)
}

/// Kronecker product `A (x) B`, the block matrix `[a_ij B]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

/// Trace inner product `<A, B> = Tr(A^dag B)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// `|v><w|`
pub fn outer(v: &ComplexVector, w: &ComplexVector) -> ComplexMatrix {
    v * w.adjoint()
}

fn split_dim(x: &ComplexMatrix) -> Result<usize> {
    let n = ensure_square(x, "partial trace input")?;
    exact_sqrt(n).ok_or_else(|| Error::Shape(format!("partial trace needs a d^2 x d^2 matrix, got {n}x{n}")))
}

/// Partial trace over the first tensor factor of `C^d (x) C^d`.
///
/// With column stacking, `Tr_1(vec(A) vec(B)^dag) = A B^dag`.
pub fn partial_trace_1(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = split_dim(x)?;
    Ok(ComplexMatrix::from_fn(d, d, |i, k| {
        (0..d).map(|j| x[(j * d + i, j * d + k)]).sum()
    }))
}

/// Partial trace over the second tensor factor; `Tr_2(vec(A) vec(B)^dag) = (B^dag A)^T`.
pub fn partial_trace_2(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = split_dim(x)?;
    Ok(ComplexMatrix::from_fn(d, d, |j, k| {
        (0..d).map(|i| x[(j * d + i, k * d + i)]).sum()
    }))
}

pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - ComplexMatrix::identity(n, n)).norm()
}

pub(crate) fn ensure_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = hermiticity_defect(a);
    let tolerance = tol * frobenius_norm(a).max(1.0);
    if deviation <= tolerance {
        Ok(())
    } else {
        Err(Error::NotHermitian { deviation, tolerance })
    }
}

pub(crate) fn ensure_unitary(u: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = unitarity_defect(u);
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::NotUnitary {
            deviation,
            tolerance: tol,
        })
    }
}

/// Eigenvalues with a unitary matrix of aligned column eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigendecomposition<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix,
}

impl<T: Copy + Into<C64>> Eigendecomposition<T> {
    /// `V diag(values) V^dag`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let v: C64 = v.into();
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= v);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
///
/// Vectors inside a degenerate cluster span the right subspace but are
/// otherwise arbitrary.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<Eigendecomposition<f64>> {
    eig_hermitian_tol(a, &Tolerances::default())
}

pub fn eig_hermitian_tol(a: &ComplexMatrix, tol: &Tolerances) -> Result<Eigendecomposition<f64>> {
    ensure_square(a, "eig_hermitian input")?;
    ensure_finite(a, "eig_hermitian input")?;
    ensure_hermitian(a, tol.hermitian)?;
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = ComplexMatrix::from_fn(a.nrows(), a.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigendecomposition { values, vectors })
}

/// Diagonalization of a unitary matrix.
///
/// Diagonalizes the Hermitian part `(U + U^dag)/2`, then splits each
/// degenerate cluster with the Hermitian matrix `i(U - U^dag)/2` restricted
/// to that cluster. The two commute for normal `U`. Eigenvalues are read off
/// as normalized Rayleigh quotients `v^dag U v`.
pub fn eig_unitary(u: &ComplexMatrix) -> Result<Eigendecomposition<C64>> {
    eig_unitary_tol(u, &Tolerances::default())
}

pub fn eig_unitary_tol(u: &ComplexMatrix, tol: &Tolerances) -> Result<Eigendecomposition<C64>> {
    let n = ensure_square(u, "eig_unitary input")?;
    ensure_finite(u, "eig_unitary input")?;
    ensure_unitary(u, tol.unitary)?;

    let ud = u.adjoint();
    let re_part = (u + &ud).scale(0.5);
    let im_part = (u - &ud) * C64::new(0.0, 0.5);
    let base = eig_hermitian_tol(
        &re_part,
        &Tolerances {
            hermitian: f64::INFINITY,
            ..*tol
        },
    )?;
    let gap = tol.cluster_gap * frobenius_norm(u);

    let mut vectors = base.vectors;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && base.values[end - 1] - base.values[end] <= gap {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let restricted = block.adjoint() * &im_part * &block;
            let inner_eig = eig_hermitian_tol(
                &restricted,
                &Tolerances {
                    hermitian: f64::INFINITY,
                    ..*tol
                },
            )?;
            let rotated = block * inner_eig.vectors;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let values = (0..n)
        .map(|j| {
            let v = vectors.column(j);
            let q = (v.adjoint() * u * v)[(0, 0)];
            if q.norm() > 0.0 {
                q / q.norm()
            } else {
                ONE
            }
        })
        .collect();
    Ok(Eigendecomposition { values, vectors })
}

/// Unitary factor of a polar decomposition together with the singular values
/// of the input.
#[derive(Debug, Clone)]
pub struct PolarFactor {
    pub unitary: ComplexMatrix,
    pub singular_values: Vec<f64>,
}

impl PolarFactor {
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Unitary polar factor `W` of a square `S = W P`, computed as `U_svd V_svd^dag`.
/// Equals `S (S^dag S)^{-1/2}` for invertible `S`; rank-deficient input still
/// yields a unitary `W`.
pub fn polar_unitary_factor(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    polar_decompose(s).map(|p| p.unitary)
}

pub fn polar_decompose(s: &ComplexMatrix) -> Result<PolarFactor> {
    ensure_square(s, "polar input")?;
    ensure_finite(s, "polar input")?;
    let svd = nalgebra::SVD::new(s.clone(), true, true);
    let left = svd.u.as_ref().expect("left singular vectors requested");
    let right_t = svd.v_t.as_ref().expect("right singular vectors requested");
    Ok(PolarFactor {
        unitary: left * right_t,
        singular_values: svd.singular_values.iter().copied().collect(),
    })
}

/// Propagator `exp(-i H t)` with hbar = 1.
pub fn expm_neg_i_ht(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    let phases: Vec<C64> = eig.values.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
    Ok(Eigendecomposition {
        values: phases,
        vectors: eig.vectors,
    }
    .reconstruct())
}

/// Write the text form: a `rows cols` header, then one row per line as
/// space-separated `re im` pairs with 17 significant digits.
pub fn write_matrix<W: Write>(mut w: W, a: &ComplexMatrix) -> std::io::Result<()> {
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for i in 0..a.nrows() {
        let mut line = String::new();
        for j in 0..a.ncols() {
            if j > 0 {
                line.push(' ');
            }
            let z = a[(i, j)];
            line.push_str(&format!("{:.16e} {:.16e}", z.re, z.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn matrix_to_string(a: &ComplexMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix(&mut buf, a).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

/// Parse the text form from a sequence of lines. Blank lines are skipped.
/// Returns the matrix and the number of lines consumed.
pub fn parse_matrix_lines<'a, I>(lines: I) -> Result<(ComplexMatrix, usize)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut lines = lines.into_iter().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline + 1,
            message: format!("bad header: {e}"),
        })?;
    let (rows, cols) = match dims[..] {
        [r, c] if r > 0 && c > 0 => (r, c),
        _ => {
            return Err(Error::Parse {
                line: hline + 1,
                message: "header must be two positive integers".into(),
            })
        }
    };
    let mut a = ComplexMatrix::zeros(rows, cols);
    let mut consumed = hline + 1;
    for i in 0..rows {
        let (lno, line) = lines.next().ok_or(Error::Parse {
            line: consumed + 1,
            message: format!("expected {rows} rows, found {i}"),
        })?;
        consumed = lno + 1;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lno + 1,
                message: e.to_string(),
            })?;
        if vals.len() != 2 * cols {
            return Err(Error::Parse {
                line: lno + 1,
                message: format!("expected {} numbers, found {}", 2 * cols, vals.len()),
            });
        }
        for j in 0..cols {
            a[(i, j)] = C64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    ensure_finite(&a, "parsed matrix")?;
    Ok((a, consumed))
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<ComplexMatrix> {
    let text: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    parse_matrix_lines(text.iter().map(String::as_str)).map(|(a, _)| a)
}
