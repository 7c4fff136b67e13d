//! Hamiltonians, states, the natural operator basis and the physical probe set.
//!
//! Kets are 0-based in storage. The natural basis element `|j><k|` has index
//! `j * d + k`, which is the 1-based pairing `(j - 1) d + k` shifted down.

use std::io::BufRead;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, ensure_finite, ensure_square, ensure_unitary, frobenius_norm, hermiticity_defect, ComplexMatrix,
    ComplexVector, C64, I, ONE, ZERO,
};
use crate::random::random_hermitian;

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `|0><1|`, raising with the convention `sigma_z |0> = |0>`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().adjoint()
}

/// Embed single-qubit operators into an `n`-qubit register; qubit 0 is the
/// leftmost (most significant) tensor factor. Unlisted qubits get identity.
pub fn embed(ops: &[(usize, ComplexMatrix)], nqubits: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2, 2);
    let mut out = ComplexMatrix::identity(1, 1);
    for q in 0..nqubits {
        let factor = ops.iter().find(|(k, _)| *k == q).map(|(_, m)| m).unwrap_or(&id);
        out = linalg::kron(&out, factor);
    }
    out
}

/// `|k>` in dimension `d`.
pub fn ket(d: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[k] = ONE;
    v
}

/// `|j><k|`
pub fn ket_bra(d: usize, j: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(j, k)] = ONE;
    m
}

/// Hermitian generator of the dynamics, with an optional known smallest
/// eigenvalue used to fix the unobservable global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
    h1_anchor: Option<f64>,
}

impl Hamiltonian {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix, "Hamiltonian")?;
        ensure_finite(&matrix, "Hamiltonian")?;
        let deviation = hermiticity_defect(&matrix);
        let tolerance = Self::HERMITIAN_TOL * frobenius_norm(&matrix).max(1.0);
        if deviation > tolerance {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Hamiltonian {
            matrix,
            h1_anchor: None,
        })
    }

    pub fn with_anchor(mut self, h1: f64) -> Self {
        self.h1_anchor = Some(h1);
        self
    }

    /// Sets the anchor to the exact smallest eigenvalue.
    pub fn with_exact_anchor(self) -> Self {
        let h1 = self.smallest_eigenvalue();
        self.with_anchor(h1)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn h1_anchor(&self) -> Option<f64> {
        self.h1_anchor
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eig_hermitian(&self.matrix)
            .expect("Hamiltonian is Hermitian by construction")
            .values
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty")
    }

    /// `h_d - h_1`
    pub fn spectral_spread(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0] - ev[ev.len() - 1]
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        linalg::expm_neg_i_ht(&self.matrix, t).expect("Hamiltonian is Hermitian by construction")
    }

    /// Check the anchor against the true smallest eigenvalue.
    pub fn validate_anchor(&self, tol: f64) -> Result<()> {
        match self.h1_anchor {
            Some(h1) if (h1 - self.smallest_eigenvalue()).abs() > tol => Err(Error::InvalidArgument(format!(
                "anchor h1={h1} differs from smallest eigenvalue {}",
                self.smallest_eigenvalue()
            ))),
            _ => Ok(()),
        }
    }

    /// Matrix text format, plus an optional trailing `h1 <value>` line.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let (m, consumed) = linalg::parse_matrix_lines(lines.iter().copied())?;
        let mut h = Hamiltonian::new(m)?;
        for (offset, line) in lines[consumed..].iter().enumerate() {
            let mut toks = line.split_whitespace();
            match (toks.next(), toks.next(), toks.next()) {
                (None, _, _) => continue,
                (Some("h1"), Some(v), None) => {
                    let v: f64 = v.parse().map_err(|e| Error::Parse {
                        line: consumed + offset + 1,
                        message: format!("bad h1 value: {e}"),
                    })?;
                    h = h.with_anchor(v);
                }
                _ => {
                    return Err(Error::Parse {
                        line: consumed + offset + 1,
                        message: format!("unexpected trailing content {line:?}"),
                    })
                }
            }
        }
        Ok(h)
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = linalg::matrix_to_string(&self.matrix);
        if let Some(h1) = self.h1_anchor {
            s.push_str(&format!("h1 {h1:.16e}\n"));
        }
        s
    }

    /// The 4x4 two-qubit benchmark Hamiltonian (spread ~11.95).
    pub fn two_qubit_benchmark() -> Self {
        let c = |re: f64, im: f64| C64::new(re, im);
        #[rustfmt::skip]
        let m = ComplexMatrix::from_row_slice(4, 4, &[
            c(5.0, 0.0),  c(0.1, 0.0), c(0.0, 3.0),  c(0.0, 4.0),
            c(0.1, 0.0),  c(-1.0, 0.0), c(1.8, 0.0), c(0.9, 0.0),
            c(0.0, -3.0), c(1.8, 0.0), c(2.0, 0.0),  c(0.0, 0.7),
            c(0.0, -4.0), c(0.9, 0.0), c(0.0, -0.7), c(3.0, 0.0),
        ]);
        Hamiltonian::new(m).expect("fixture is Hermitian")
    }

    /// `H0^{(x) n}` with `H0 = [[1, 0.9+0.9i], [0.9-0.9i, 2]]`.
    pub fn tensor_power_fixture(nqubits: usize) -> Result<Self> {
        if nqubits == 0 {
            return Err(Error::InvalidArgument("nqubits must be >= 1".into()));
        }
        let h0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.9, 0.9),
                C64::new(0.9, -0.9),
                C64::new(2.0, 0.0),
            ],
        );
        let mut m = h0.clone();
        for _ in 1..nqubits {
            m = linalg::kron(&m, &h0);
        }
        Hamiltonian::new(m)
    }

    /// GUE draw rescaled to the requested spectral spread.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, spread: f64) -> Result<Self> {
        if d < 2 || !(spread > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "random Hamiltonian needs d >= 2 and positive spread, got d={d}, spread={spread}"
            )));
        }
        let h = Hamiltonian::new(random_hermitian(rng, d))?;
        let scale = spread / h.spectral_spread();
        Hamiltonian::new(h.matrix.scale(scale))
    }
}

/// 1D chain `sum_k (w_k/2) Z_k + sum_k d_k (S+_k S-_{k+1} + S-_k S+_{k+1})`.
pub fn chain_hamiltonian(nqubits: usize, omegas: &[f64], deltas: &[f64]) -> Result<Hamiltonian> {
    if nqubits == 0 || omegas.len() != nqubits || deltas.len() + 1 != nqubits {
        return Err(Error::InvalidArgument(format!(
            "chain of {nqubits} qubits needs {nqubits} omegas and {} deltas, got {} and {}",
            nqubits.saturating_sub(1),
            omegas.len(),
            deltas.len()
        )));
    }
    let dim = 1 << nqubits;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (k, &w) in omegas.iter().enumerate() {
        h += embed(&[(k, pauli_z())], nqubits).scale(w / 2.0);
    }
    for (k, &delta) in deltas.iter().enumerate() {
        let hop = embed(&[(k, sigma_plus()), (k + 1, sigma_minus())], nqubits)
            + embed(&[(k, sigma_minus()), (k + 1, sigma_plus())], nqubits);
        h += hop.scale(delta);
    }
    Hamiltonian::new(h)
}

/// A physical state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix, "density matrix")?;
        ensure_finite(&matrix, "density matrix")?;
        let herm = hermiticity_defect(&matrix);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::Unphysical(format!("Hermiticity defect {herm:.3e}")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::Unphysical(format!("trace {tr}")));
        }
        let min = *linalg::eig_hermitian(&matrix)?.values.last().expect("non-empty");
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::Unphysical(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix(matrix))
    }

    /// Wrap without validation; for states produced by trusted operations.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        DensityMatrix(matrix)
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero ket.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("ket must be nonzero and finite".into()));
        }
        let v = psi.unscale(n);
        Ok(DensityMatrix(linalg::outer(&v, &v)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(d, d).unscale(d as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// `U rho U^dag`
pub fn evolve(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(Error::Shape(format!(
            "propagator {}x{} does not match state dimension {}",
            u.nrows(),
            u.ncols(),
            rho.dim()
        )));
    }
    ensure_unitary(u, 1e-8)?;
    Ok(DensityMatrix(u * rho.matrix() * u.adjoint()))
}

/// The `d^2` elementary matrices `|j><k|`, orthonormal under `Tr(A^dag B)`.
#[derive(Debug, Clone)]
pub struct NaturalBasis {
    d: usize,
}

impl NaturalBasis {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.d * self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.d + k
    }

    /// Inverse of [`NaturalBasis::index`]: `(j, k)`.
    pub fn pair(&self, i: usize) -> (usize, usize) {
        (i / self.d, i % self.d)
    }

    pub fn element(&self, i: usize) -> ComplexMatrix {
        let (j, k) = self.pair(i);
        ket_bra(self.d, j, k)
    }

    pub fn elements(&self) -> Vec<ComplexMatrix> {
        (0..self.len()).map(|i| self.element(i)).collect()
    }
}

pub fn natural_basis(d: usize) -> Result<NaturalBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    Ok(NaturalBasis { d })
}

/// How the output for one natural-basis element is obtained from probe outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// Linear combination `sum c_p E(probe_p)`.
    Combination(Vec<(usize, C64)>),
    /// Adjoint of the assembled output for another basis index. Only used
    /// when the map is assumed Hermiticity-preserving.
    AdjointOf(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeKind {
    Diagonal(usize),
    /// `(|j> + |k>)/sqrt(2)`
    Plus(usize, usize),
    /// `(|a> + i|b>)/sqrt(2)`
    PhasePlus(usize, usize),
}

/// Physical input states realizing the natural basis by linear combination.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    d: usize,
    kinds: Vec<ProbeKind>,
    probes: Vec<DensityMatrix>,
    recipes: Vec<Recipe>,
}

impl ProbeSet {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn probes(&self) -> &[DensityMatrix] {
        &self.probes
    }

    pub fn kinds(&self) -> &[ProbeKind] {
        &self.kinds
    }

    /// Recipe for natural-basis index `i`.
    pub fn recipe(&self, i: usize) -> &Recipe {
        &self.recipes[i]
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    /// Assemble the outputs for every natural-basis element, in basis order.
    pub fn assemble_all(&self, outputs: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        if outputs.len() != self.len() {
            return Err(Error::Shape(format!(
                "expected {} probe outputs, got {}",
                self.len(),
                outputs.len()
            )));
        }
        let mut assembled: Vec<Option<ComplexMatrix>> = vec![None; self.recipes.len()];
        for (i, r) in self.recipes.iter().enumerate() {
            if let Recipe::Combination(terms) = r {
                assembled[i] = Some(assemble_output_for_basis(outputs, terms)?);
            }
        }
        for (i, r) in self.recipes.iter().enumerate() {
            if let Recipe::AdjointOf(src) = r {
                let m = assembled[*src]
                    .as_ref()
                    .expect("adjoint source is a combination")
                    .adjoint();
                assembled[i] = Some(m);
            }
        }
        Ok(assembled
            .into_iter()
            .map(|m| m.expect("every index assembled"))
            .collect())
    }
}

/// Probe set with `(3d^2 - d)/2` states: every `|j><j|`, and for each pair
/// `j < k` the states `(|j>+|k>)/sqrt2`, `(|j>+i|k>)/sqrt2`, `(|k>+i|j>)/sqrt2`.
pub fn probe_set(d: usize) -> Result<ProbeSet> {
    build_probe_set(d, false)
}

/// Probe set that drops the third state of each pair and recovers
/// `E(|k><j|)` as `E(|j><k|)^dag`. Valid only for Hermiticity-preserving maps.
pub fn probe_set_hermitian_map(d: usize) -> Result<ProbeSet> {
    build_probe_set(d, true)
}

fn build_probe_set(d: usize, assume_hermitian_map: bool) -> Result<ProbeSet> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    let basis = natural_basis(d)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut kinds = Vec::new();
    let mut probes = Vec::new();
    for j in 0..d {
        kinds.push(ProbeKind::Diagonal(j));
        probes.push(DensityMatrix(ket_bra(d, j, j)));
    }
    let mut recipes = vec![Recipe::AdjointOf(usize::MAX); d * d];
    for j in 0..d {
        recipes[basis.index(j, j)] = Recipe::Combination(vec![(j, ONE)]);
    }
    let w = C64::new(-0.5, -0.5);
    for j in 0..d {
        for k in (j + 1)..d {
            let plus = probes.len();
            kinds.push(ProbeKind::Plus(j, k));
            probes.push(DensityMatrix::pure(&((ket(d, j) + ket(d, k)) * C64::new(s, 0.0)))?);

            let minus_jk = probes.len();
            kinds.push(ProbeKind::PhasePlus(j, k));
            probes.push(DensityMatrix::pure(&((ket(d, j) + ket(d, k) * I) * C64::new(s, 0.0)))?);
            recipes[basis.index(j, k)] = Recipe::Combination(vec![(plus, ONE), (minus_jk, I), (j, w), (k, w)]);

            if assume_hermitian_map {
                recipes[basis.index(k, j)] = Recipe::AdjointOf(basis.index(j, k));
            } else {
                let minus_kj = probes.len();
                kinds.push(ProbeKind::PhasePlus(k, j));
                probes.push(DensityMatrix::pure(&((ket(d, k) + ket(d, j) * I) * C64::new(s, 0.0)))?);
                recipes[basis.index(k, j)] = Recipe::Combination(vec![(plus, ONE), (minus_kj, I), (j, w), (k, w)]);
            }
        }
    }
    Ok(ProbeSet {
        d,
        kinds,
        probes,
        recipes,
    })
}

/// Complex linear combination of probe outputs. The result estimates the
/// image of a (generally non-Hermitian) basis element.
pub fn assemble_output_for_basis(outputs: &[ComplexMatrix], terms: &[(usize, C64)]) -> Result<ComplexMatrix> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty recipe".into()))?;
    let shape = outputs
        .get(first.0)
        .ok_or_else(|| Error::InvalidArgument(format!("probe index {} out of range", first.0)))?
        .shape();
    let mut acc = ComplexMatrix::zeros(shape.0, shape.1);
    for &(p, c) in terms {
        let out = outputs
            .get(p)
            .ok_or_else(|| Error::InvalidArgument(format!("probe index {p} out of range")))?;
        acc += out * c;
    }
    Ok(acc)
}
