//! Independent verification routines: dense reference constructions and
//! numerical checks of the inequalities the error analysis relies on.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::{ExperimentConfig, HamiltonianSource, PreparedExperiment};
use crate::linalg::{self, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::process::b_permutation;
use crate::quantum::{natural_basis, Hamiltonian};
use crate::random::{derive_seed, random_gaussian_matrix, random_hermitian};

/// Outcome of one check: how many cases were tried and how many failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Smallest `bound - value` seen (negative means a violation).
    pub worst_margin: f64,
}

impl CheckReport {
    fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            cases: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }

    /// Record `value <= bound + slack`.
    fn record(&mut self, value: f64, bound: f64, slack: f64) {
        self.cases += 1;
        let margin = bound - value;
        self.worst_margin = self.worst_margin.min(margin);
        if !(margin >= -slack) {
            self.violations += 1;
        }
    }

    fn record_bool(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 1.0 }, 0.0, 0.0);
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.violations == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} cases, {} violations, worst margin {:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.violations,
            self.worst_margin
        )
    }
}

/// Dense `B` from its defining expansion `E_j rho_m E_k^dag = sum_n beta^{jk}_{mn} rho_n`
/// with both bases natural. Row `n d^2 + m`, column `k d^2 + j`. `O(d^8)` memory.
pub fn dense_b(d: usize) -> ComplexMatrix {
    let basis = natural_basis(d).expect("d >= 2");
    let e = basis.elements();
    let d2 = d * d;
    let mut b = ComplexMatrix::zeros(d2 * d2, d2 * d2);
    for j in 0..d2 {
        for k in 0..d2 {
            for m in 0..d2 {
                let image = &e[j] * &e[m] * e[k].adjoint();
                for n in 0..d2 {
                    b[(n * d2 + m, k * d2 + j)] = linalg::inner(&e[n], &image);
                }
            }
        }
    }
    b
}

/// Vector sandwich: `||bb^dag - cc^dag|| / (||b|| + ||c||) <= min_theta ||e^{i theta} b - c||
/// <= sqrt2 ||bb^dag - cc^dag|| / sqrt(||b||^2 + ||c||^2)`, with the minimizer
/// `theta = arg(b^dag c)`.
pub fn check_vector_sandwich(seed: u64, pairs: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("vector sandwich");
    for i in 0..pairs {
        let n = rng.random_range(1..=16);
        let b: ComplexVector = random_gaussian_matrix(&mut rng, n, 1).column(0).into();
        let mut c: ComplexVector = random_gaussian_matrix(&mut rng, n, 1).column(0).into();
        match i % 4 {
            // nearly aligned up to a phase
            1 => c = b.scale(rng.random_range(0.5..2.0)) * phase(rng.random_range(-PI..PI)) + c.scale(1e-3),
            2 => c = c.scale(rng.random_range(1e-3..1e3)),
            _ => {}
        }
        let outer = (&b * b.adjoint() - &c * c.adjoint()).norm();
        let theta = b.dotc(&c).arg();
        let mid = (b.clone() * phase(theta) - &c).norm();
        let (nb, nc) = (b.norm(), c.norm());
        let lower = outer / (nb + nc);
        let upper = 2f64.sqrt() * outer / (nb * nb + nc * nc).sqrt();
        let scale = nb.max(nc);
        report.record(lower, mid, 1e-12 * scale);
        report.record(mid, upper, 1e-12 * scale);
    }
    report
}

fn phase(theta: f64) -> linalg::C64 {
    linalg::C64::from_polar(1.0, theta)
}

/// `(2 / pi^2) theta^2 <= 1 - cos theta` on a uniform grid over `[-pi, pi]`.
pub fn check_cosine_bound(points: usize) -> CheckReport {
    let mut report = CheckReport::new("cosine bound");
    for i in 0..points {
        let theta = -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
        report.record(2.0 / (PI * PI) * theta * theta, 1.0 - theta.cos(), 1e-12);
    }
    report
}

/// Weyl perturbation: `max_j |lambda_j(A + E) - lambda_j(A)| <= ||E||`, checked
/// against the operator norm (and hence the Frobenius norm).
pub fn check_weyl(seed: u64, pairs: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("Weyl perturbation");
    for _ in 0..pairs {
        let n = rng.random_range(2..=12);
        let a = random_hermitian(&mut rng, n);
        let e = random_hermitian(&mut rng, n).scale(10f64.powf(rng.random_range(-6.0..1.0)));
        let la = linalg::eig_hermitian(&a).expect("hermitian").values;
        let lb = linalg::eig_hermitian(&(&a + &e)).expect("hermitian").values;
        let le = linalg::eig_hermitian(&e).expect("hermitian").values;
        let op = le.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = la.iter().zip(&lb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let slack = 1e-12 * (a.norm() + e.norm());
        report.record(gap, op, slack);
        report.record(op, e.norm(), slack);
    }
    report
}

/// The permutation equals the dense construction entry for entry, and the
/// dense matrix is a unitary permutation matrix. All comparisons are exact.
pub fn check_b_oracle(d: usize) -> CheckReport {
    let mut report = CheckReport::new(format!("permutation B, d={d}"));
    let dense = dense_b(d);
    let b = b_permutation(d).expect("d >= 2");
    let n = dense.nrows();
    for r in 0..n {
        let mut ones = 0;
        for c in 0..n {
            let v = dense[(r, c)];
            ones += (v == ONE) as usize;
            report.record_bool(v == ONE || v == ZERO);
            report.record_bool((b.perm()[r] == c) == (v == ONE));
        }
        report.record_bool(ones == 1);
    }
    for c in 0..n {
        report.record_bool(dense.column(c).iter().filter(|&&v| v == ONE).count() == 1);
    }
    report.record_bool(dense.adjoint() * &dense == ComplexMatrix::identity(n, n));
    report.record_bool(b.is_bijection());
    report
}

/// Random Hamiltonians identified from exact outcome probabilities at half
/// the evolution-time bound; Frobenius error at most `tol`.
pub fn check_noiseless(seed: u64, dims: &[usize], per_dim: usize, tol: f64) -> CheckReport {
    let mut report = CheckReport::new(format!("noiseless identification, d in {dims:?}"));
    for (di, &d) in dims.iter().enumerate() {
        for i in 0..per_dim {
            let src = HamiltonianSource::Random {
                seed: derive_seed(seed, &[di as u64, i as u64]),
                dim: d,
                spread: 1.0 + (i % 7) as f64,
            };
            let outcome = src.load().and_then(|h: Hamiltonian| {
                let t = 0.5 * std::f64::consts::PI / h.spectral_spread();
                let shots = 3u64.pow(d.trailing_zeros());
                let cfg = ExperimentConfig::new(src.clone(), t, shots).exact().with_repetitions(1);
                PreparedExperiment::with_hamiltonian(&cfg, h)?.run(0)
            });
            match outcome {
                Ok(rec) => report.record(rec.mse_anchor_gauge.sqrt(), tol, 0.0),
                Err(_) => report.record_bool(false),
            }
        }
    }
    report
}

/// Every check, at the sizes used by the `selftest` command.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        check_vector_sandwich(derive_seed(seed, &[1]), 1000),
        check_cosine_bound(10_000),
        check_weyl(derive_seed(seed, &[2]), 1000),
        check_b_oracle(2),
        check_b_oracle(3),
        check_b_oracle(4),
        check_noiseless(derive_seed(seed, &[3]), &[2, 4, 8], 10, 1e-8),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass() {
        assert!(check_vector_sandwich(1, 200).passed());
        assert!(check_cosine_bound(1001).passed());
        assert!(check_weyl(2, 100).passed());
        assert!(check_b_oracle(2).passed());
        assert!(check_noiseless(3, &[2, 4], 3, 1e-8).passed());
    }

    #[test]
    fn report_counts_violations() {
        let mut r = CheckReport::new("x");
        r.record(1.0, 2.0, 0.0);
        r.record(3.0, 2.0, 0.5);
        assert!(!r.passed());
        assert_eq!(r.violations, 1);
        assert_eq!(r.worst_margin, -1.0);
        assert!(r.to_string().starts_with("FAIL x"));
    }
}
