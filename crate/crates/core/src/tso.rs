//! Two-step optimization and Hamiltonian recovery.
//!
//! 1. Rank-one fit: the `vec(S) vec(S)^dag` closest to `D` is given by the top
//!    eigenpair `(alpha_1, vec(P_1))` of `D + D^dag` as `S = sqrt(alpha_1/2) P_1`.
//! 2. Unitary fit: the unitary `G` closest to `S` in the rank-one sense is the
//!    polar factor of `S`, up to a global phase.
//!
//! The Kraus operator is `G^T`; its eigenphases give `H` once the spread of
//! the spectrum times `t` is below pi and the smallest eigenvalue is known.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result, Stage, StageExt};
use crate::linalg::{self, ComplexMatrix, Eigendecomposition, C64};
use crate::process::{apply_b_dagger, b_permutation, LambdaMatrix, PermutedData};
use crate::quantum::Hamiltonian;

/// Non-fatal conditions where the data leave the optimum non-unique.
#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// Top eigenvalue of `D + D^dag` is (numerically) repeated.
    DegenerateTopEigenvalue { gap: f64 },
    /// The rank-one factor `S` is (numerically) singular.
    SingularFactor { min_singular_value: f64 },
}

#[derive(Debug, Clone)]
pub struct RankOneFit {
    pub s_hat: ComplexMatrix,
    /// Largest eigenvalue of `D + D^dag`.
    pub alpha1: f64,
    /// `||vec(S) vec(S)^dag - D||`
    pub residual: f64,
    pub warnings: Vec<FitWarning>,
}

#[derive(Debug, Clone)]
pub struct UnitaryFit {
    pub g_hat: ComplexMatrix,
    pub warnings: Vec<FitWarning>,
}

/// Record of how the global phase was fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    /// Smallest eigenvalue the estimate was pinned to.
    pub h1_anchor: f64,
    /// Largest repaired eigenphase, mapped to `-h1 t`.
    pub phase_offset: f64,
    /// Number of eigenphases moved down by `2 pi` across the branch cut.
    pub wrapped: usize,
}

#[derive(Debug, Clone)]
pub struct HamiltonianEstimate {
    pub h_hat: ComplexMatrix,
    pub gauge: Gauge,
}

const DEGENERACY_TOL: f64 = 1e-8;
const SINGULAR_TOL: f64 = 1e-12;

pub fn solve_rank_one(data: &PermutedData) -> Result<RankOneFit> {
    let dm = data.matrix();
    let n = linalg::ensure_square(dm, "D")?;
    let d = linalg::exact_sqrt(n).ok_or_else(|| Error::Shape(format!("D must be d^2 x d^2, got {n}x{n}")))?;
    linalg::ensure_finite(dm, "D")?;
    let sym = dm + dm.adjoint();
    let eig = linalg::eig_hermitian(&sym)?;
    let alpha1 = eig.values[0];
    if !(alpha1 > 0.0) {
        return Err(Error::DegenerateData(format!(
            "largest eigenvalue of D + D^dag is {alpha1:.3e}; no positive rank-one fit exists"
        )));
    }
    let mut warnings = Vec::new();
    if n > 1 {
        let gap = alpha1 - eig.values[1];
        if gap <= DEGENERACY_TOL * alpha1.max(1.0) {
            warnings.push(FitWarning::DegenerateTopEigenvalue { gap });
        }
    }
    let top = eig.vectors.column(0).into_owned();
    let s_vec = top.scale((alpha1 / 2.0).sqrt());
    let residual = (linalg::outer(&s_vec, &s_vec) - dm).norm();
    let s_hat = ComplexMatrix::from_column_slice(d, d, s_vec.as_slice());
    Ok(RankOneFit {
        s_hat,
        alpha1,
        residual,
        warnings,
    })
}

/// Unitary polar factor of `S`. The global phase is left as produced.
pub fn solve_unitary(fit: &RankOneFit) -> Result<UnitaryFit> {
    let polar = linalg::polar_decompose(&fit.s_hat)?;
    let mut warnings = fit.warnings.clone();
    let smax = polar.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = polar.min_singular_value();
    if smin <= SINGULAR_TOL * smax.max(f64::MIN_POSITIVE) {
        warnings.push(FitWarning::SingularFactor {
            min_singular_value: smin,
        });
    }
    Ok(UnitaryFit {
        g_hat: polar.unitary,
        warnings,
    })
}

/// The single Kraus operator `G^T`, up to the still-undetermined global phase.
pub fn kraus_from_g(fit: &UnitaryFit) -> ComplexMatrix {
    fit.g_hat.transpose()
}

fn lexicographic(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Matrix logarithm of the propagator estimate with the branch fixed by the
/// known smallest eigenvalue `h1`.
///
/// Eigenphases are taken in `[0, 2 pi)` and sorted ascending. If they span
/// at least pi, every phase at or beyond `theta_1 + pi` is moved down by
/// `2 pi`. The largest phase is then mapped to `-h1 t`, so the smallest
/// eigenvalue of the result is exactly `h1`.
pub fn hamiltonian_from_unitary(a_hat: &ComplexMatrix, t: f64, h1: f64) -> Result<HamiltonianEstimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be positive, got {t}"
        )));
    }
    if !h1.is_finite() {
        return Err(Error::InvalidArgument("h1 anchor must be finite".into()));
    }
    let eig = linalg::eig_unitary(a_hat)?;
    let n = eig.values.len();

    let mut order: Vec<(f64, usize)> = eig
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut th = v.arg();
            if th < 0.0 {
                th += TAU;
            }
            if th >= TAU {
                th -= TAU;
            }
            (th, j)
        })
        .collect();
    order.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| lexicographic(eig.vectors.column(a.1).as_slice(), eig.vectors.column(b.1).as_slice()))
    });

    let mut phases: Vec<f64> = order.iter().map(|p| p.0).collect();
    let mut wrapped = 0;
    if phases[n - 1] - phases[0] >= PI {
        let k = phases
            .iter()
            .position(|&th| th - phases[0] >= PI)
            .expect("spread >= pi");
        for th in &mut phases[k..] {
            *th -= TAU;
        }
        wrapped = n - k;
    }
    let max = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = phases.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min >= PI {
        return Err(Error::AssumptionViolation(format!(
            "eigenphases span {:.4} rad >= pi after branch repair; t={t} is too long for this spectrum",
            max - min
        )));
    }

    let eigenvalues: Vec<f64> = phases.iter().map(|&th| -(th - h1 * t - max) / t).collect();
    let q = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, order[j].1)]);
    let h = Eigendecomposition {
        values: eigenvalues,
        vectors: q,
    }
    .reconstruct();
    Ok(HamiltonianEstimate {
        h_hat: (&h + h.adjoint()).scale(0.5),
        gauge: Gauge {
            h1_anchor: h1,
            phase_offset: max,
            wrapped,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTimeReport {
    /// `0 < t < pi / (h_d - h_1)`
    pub valid: bool,
    /// `pi / (h_d - h_1)`; infinite for a scalar Hamiltonian.
    pub bound: f64,
    /// `bound - t`
    pub margin: f64,
    /// Whether `t < pi / (2 h_m)` for the supplied norm bound `h_m`.
    pub sufficient: Option<bool>,
}

/// Validity window for the evolution time. `norm_bound`, if given, is an
/// upper bound on a submultiplicative norm of `H`, which yields the
/// sufficient condition `t < pi / (2 h_m)`.
pub fn check_evolution_time(h: &Hamiltonian, t: f64, norm_bound: Option<f64>) -> EvolutionTimeReport {
    let spread = h.spectral_spread();
    let bound = if spread > 0.0 { PI / spread } else { f64::INFINITY };
    EvolutionTimeReport {
        valid: t > 0.0 && t < bound,
        bound,
        margin: bound - t,
        sufficient: norm_bound.map(|hm| t > 0.0 && t < PI / (2.0 * hm)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `Tr[(H_hat - H)^dag (H_hat - H)]` with both pinned to the true `h_1`.
    pub anchor_gauge: f64,
    /// `min_c ||H_hat + c I - H||^2`.
    pub shift_minimized: f64,
}

pub fn gauge_aligned_error(est: &HamiltonianEstimate, truth: &Hamiltonian) -> Result<ErrorReport> {
    let d = truth.dim();
    if est.h_hat.shape() != (d, d) {
        return Err(Error::Shape(format!(
            "estimate is {}x{}, truth is {d}x{d}",
            est.h_hat.nrows(),
            est.h_hat.ncols()
        )));
    }
    let shift = truth.smallest_eigenvalue() - est.gauge.h1_anchor;
    let diff = &est.h_hat + ComplexMatrix::identity(d, d).scale(shift) - truth.matrix();
    let anchor_gauge = diff.norm_squared();
    let tr = diff.trace();
    let shift_minimized = (anchor_gauge - tr.norm_sqr() / d as f64).max(0.0);
    Ok(ErrorReport {
        anchor_gauge,
        shift_minimized,
    })
}

/// Everything produced by the data-processing half of the pipeline.
#[derive(Debug, Clone)]
pub struct Identification {
    pub rank_one: RankOneFit,
    pub unitary: UnitaryFit,
    pub kraus: ComplexMatrix,
    pub estimate: HamiltonianEstimate,
}

/// `Lambda -> D -> S -> G -> A -> H`.
pub fn identify_from_lambda(lam: &LambdaMatrix, t: f64, h1: f64) -> Result<Identification> {
    let b = b_permutation(lam.system_dim()).stage(Stage::ProcessMatrix)?;
    let data = apply_b_dagger(lam, &b).stage(Stage::ProcessMatrix)?;
    identify_from_data(&data, t, h1)
}

pub fn identify_from_data(data: &PermutedData, t: f64, h1: f64) -> Result<Identification> {
    let rank_one = solve_rank_one(data).stage(Stage::RankOneFit)?;
    let unitary = solve_unitary(&rank_one).stage(Stage::UnitaryFit)?;
    let kraus = kraus_from_g(&unitary);
    let estimate = hamiltonian_from_unitary(&kraus, t, h1).stage(Stage::Logarithm)?;
    Ok(Identification {
        rank_one,
        unitary,
        kraus,
        estimate,
    })
}
