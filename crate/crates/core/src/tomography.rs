//! Cube-basis measurement simulation and linear regression state estimation.
//!
//! A state is parametrized as `rho = I/d + sum_a theta_a B_a` over a traceless
//! orthonormal Hermitian basis `{B_a}`. Each measured outcome contributes one
//! regression row `p_i - 1/d = sum_a theta_a Tr(M_i B_a)`, solved by ordinary
//! least squares with a pseudo-inverse that depends only on the plan.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64, I, ONE, ZERO};
use crate::quantum::{ket_bra, pauli_x, pauli_y, pauli_z, DensityMatrix};
use crate::random::derive_seed;

/// One projective measurement: rank-one projectors `|v_i><v_i|` summing to identity.
#[derive(Debug, Clone)]
pub struct Setting {
    kets: Vec<ComplexVector>,
}

impl Setting {
    pub fn new(kets: Vec<ComplexVector>) -> Self {
        Setting { kets }
    }

    pub fn kets(&self) -> &[ComplexVector] {
        &self.kets
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn projector(&self, i: usize) -> ComplexMatrix {
        linalg::outer(&self.kets[i], &self.kets[i])
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    nqubits: usize,
    settings: Vec<Setting>,
    shots: Vec<u64>,
}

impl MeasurementPlan {
    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        1 << self.nqubits
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    /// Shots allotted to each setting.
    pub fn shots(&self) -> &[u64] {
        &self.shots
    }

    /// Copies consumed per measured state.
    pub fn total_shots(&self) -> u64 {
        self.shots.iter().sum()
    }

    pub fn num_outcomes(&self) -> usize {
        self.settings.iter().map(Setting::len).sum()
    }
}

fn single_qubit_axes() -> [[ComplexVector; 2]; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: C64, b: C64| ComplexVector::from_vec(vec![a * s, b * s]);
    [
        [v(ONE, ONE), v(ONE, -ONE)],
        [v(ONE, I), v(ONE, -I)],
        [
            ComplexVector::from_vec(vec![ONE, ZERO]),
            ComplexVector::from_vec(vec![ZERO, ONE]),
        ],
    ]
}

fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    ComplexVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}

fn cube_settings(nqubits: usize) -> Vec<Setting> {
    let axes = single_qubit_axes();
    let nsettings = 3usize.pow(nqubits as u32);
    (0..nsettings)
        .map(|s| {
            // base-3 digits of s, qubit 0 most significant; axis order x, y, z
            let digits: Vec<usize> = (0..nqubits)
                .map(|q| (s / 3usize.pow((nqubits - 1 - q) as u32)) % 3)
                .collect();
            let kets = (0..(1usize << nqubits))
                .map(|o| {
                    (0..nqubits).fold(ComplexVector::from_vec(vec![ONE]), |acc, q| {
                        let bit = (o >> (nqubits - 1 - q)) & 1;
                        kron_vec(&acc, &axes[digits[q]][bit])
                    })
                })
                .collect();
            Setting { kets }
        })
        .collect()
}

/// Tensor-product cube measurement with a fixed number of shots per setting.
pub fn cube_plan(nqubits: usize, shots_per_setting: u64) -> Result<MeasurementPlan> {
    if nqubits < 1 {
        return Err(Error::InvalidArgument("cube plan needs at least one qubit".into()));
    }
    if shots_per_setting == 0 {
        return Err(Error::InvalidArgument("shots per setting must be positive".into()));
    }
    let settings = cube_settings(nqubits);
    let shots = vec![shots_per_setting; settings.len()];
    Ok(MeasurementPlan {
        nqubits,
        settings,
        shots,
    })
}

/// Cube measurement spending `total` copies per state: equal split across the
/// `3^n` settings, the remainder going one each to the first settings.
pub fn cube_plan_with_total(nqubits: usize, total: u64) -> Result<MeasurementPlan> {
    if nqubits < 1 {
        return Err(Error::InvalidArgument("cube plan needs at least one qubit".into()));
    }
    let settings = cube_settings(nqubits);
    let n = settings.len() as u64;
    if total < n {
        return Err(Error::Config(format!(
            "{total} copies per state cannot cover {n} measurement settings"
        )));
    }
    let shots = (0..n).map(|s| total / n + u64::from(s < total % n)).collect();
    Ok(MeasurementPlan {
        nqubits,
        settings,
        shots,
    })
}

const CLIP_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;

/// Born-rule outcome probabilities `Tr(rho M_i)`.
pub fn born_probabilities(rho: &DensityMatrix, setting: &Setting) -> Result<Vec<f64>> {
    let m = rho.matrix();
    if setting.kets.iter().any(|k| k.len() != m.nrows()) {
        return Err(Error::Shape("setting dimension does not match the state".into()));
    }
    let probs = setting
        .kets
        .iter()
        .map(|v| {
            let p = (v.adjoint() * m * v)[(0, 0)].re;
            if p < -CLIP_TOL || p > 1.0 + CLIP_TOL {
                Err(Error::Unphysical(format!("outcome probability {p:.3e}")))
            } else {
                Ok(p.clamp(0.0, 1.0))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Unphysical(format!("probabilities sum to {total}")));
    }
    Ok(probs)
}

/// Multinomial draw of `shots` outcomes, reproducible from `seed`.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative or NaN probability {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = total;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q)
            .expect("probability clamped to [0, 1]")
            .sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Observed outcome counts of one state, per setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    pub counts: Vec<Vec<u64>>,
}

impl ShotCounts {
    pub fn total_shots(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Relative frequencies, flattened setting-major.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .flat_map(|c| {
                let n: u64 = c.iter().sum();
                c.iter().map(move |&k| if n == 0 { 0.0 } else { k as f64 / n as f64 })
            })
            .collect()
    }

    /// CSV with columns `setting_index,outcome_index,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["setting_index", "outcome_index", "count"])?;
        for (s, c) in self.counts.iter().enumerate() {
            for (o, k) in c.iter().enumerate() {
                wtr.write_record([s.to_string(), o.to_string(), k.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut counts: Vec<Vec<u64>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<u64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: rec.position().map_or(0, |p| p.line() as usize),
                        message: format!("bad field {i}"),
                    })
            };
            let (s, o, k) = (field(0)? as usize, field(1)? as usize, field(2)?);
            if counts.len() <= s {
                counts.resize(s + 1, Vec::new());
            }
            if counts[s].len() <= o {
                counts[s].resize(o + 1, 0);
            }
            counts[s][o] = k;
        }
        Ok(ShotCounts { counts })
    }
}

/// Measure a state under `plan`; setting `s` draws from the stream
/// `derive_seed(seed, [s])`.
pub fn simulate_counts(rho: &DensityMatrix, plan: &MeasurementPlan, seed: u64) -> Result<ShotCounts> {
    let counts = plan
        .settings
        .iter()
        .zip(&plan.shots)
        .enumerate()
        .map(|(s, (setting, &shots))| {
            let probs = born_probabilities(rho, setting)?;
            sample_counts(&probs, shots, derive_seed(seed, &[s as u64]))
        })
        .collect::<Result<_>>()?;
    Ok(ShotCounts { counts })
}

/// Exact outcome probabilities, flattened setting-major.
pub fn exact_frequencies(rho: &DensityMatrix, plan: &MeasurementPlan) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(plan.num_outcomes());
    for setting in &plan.settings {
        out.extend(born_probabilities(rho, setting)?);
    }
    Ok(out)
}

/// Traceless orthonormal Hermitian basis of `d x d` matrices: normalized
/// Pauli strings when `d` is a power of two, generalized Gell-Mann otherwise.
pub fn traceless_basis(d: usize) -> Vec<ComplexMatrix> {
    if d.is_power_of_two() && d >= 2 {
        let n = d.trailing_zeros() as usize;
        let paulis = [ComplexMatrix::identity(2, 2), pauli_x(), pauli_y(), pauli_z()];
        let norm = 1.0 / (d as f64).sqrt();
        (1..4usize.pow(n as u32))
            .map(|code| {
                (0..n)
                    .fold(ComplexMatrix::identity(1, 1), |acc, q| {
                        let digit = (code >> (2 * (n - 1 - q))) & 3;
                        linalg::kron(&acc, &paulis[digit])
                    })
                    .scale(norm)
            })
            .collect()
    } else {
        gell_mann(d)
    }
}

fn gell_mann(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            out.push((ket_bra(d, j, k) + ket_bra(d, k, j)).scale(s));
            out.push((ket_bra(d, j, k) * (-I) + ket_bra(d, k, j) * I).scale(s));
        }
    }
    for l in 1..d {
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = ONE;
        }
        m[(l, l)] = C64::new(-(l as f64), 0.0);
        out.push(m.scale(1.0 / ((l * (l + 1)) as f64).sqrt()));
    }
    out
}

/// Raw regression output: Hermitian, unit trace, possibly not positive.
#[derive(Debug, Clone)]
pub struct LinearEstimate {
    pub matrix: ComplexMatrix,
    pub projected: Option<DensityMatrix>,
}

/// Least-squares estimator with the plan-dependent pseudo-inverse precomputed.
#[derive(Debug, Clone)]
pub struct LinearRegressionEstimator {
    d: usize,
    basis: Vec<ComplexMatrix>,
    pinv: DMatrix<f64>,
}

impl LinearRegressionEstimator {
    pub fn new(plan: &MeasurementPlan) -> Result<Self> {
        let d = plan.dim();
        let basis = traceless_basis(d);
        let rows: Vec<&ComplexVector> = plan.settings.iter().flat_map(|s| s.kets.iter()).collect();
        let design = DMatrix::from_fn(rows.len(), basis.len(), |r, a| {
            let v = rows[r];
            (v.adjoint() * &basis[a] * v)[(0, 0)].re
        });
        let gram = design.transpose() * &design;
        let eig = nalgebra::SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(min > 1e-10 * max) {
            return Err(Error::Config(format!(
                "measurement plan is not informationally complete (Gram eigenvalues {min:.3e}..{max:.3e})"
            )));
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Config("regression normal matrix is not positive definite".into()))?;
        let pinv = chol.solve(&design.transpose());
        Ok(LinearRegressionEstimator { d, basis, pinv })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Estimate from flattened per-outcome frequencies.
    pub fn estimate_frequencies(&self, freqs: &[f64]) -> Result<ComplexMatrix> {
        if freqs.len() != self.pinv.ncols() {
            return Err(Error::Shape(format!(
                "expected {} frequencies, got {}",
                self.pinv.ncols(),
                freqs.len()
            )));
        }
        let offset = 1.0 / self.d as f64;
        let y = DVector::from_iterator(freqs.len(), freqs.iter().map(|f| f - offset));
        let theta = &self.pinv * y;
        let mut rho = ComplexMatrix::identity(self.d, self.d).scale(offset);
        for (b, &th) in self.basis.iter().zip(theta.iter()) {
            rho += b.scale(th);
        }
        Ok(rho)
    }

    pub fn estimate(&self, counts: &ShotCounts) -> Result<LinearEstimate> {
        Ok(LinearEstimate {
            matrix: self.estimate_frequencies(&counts.frequencies())?,
            projected: None,
        })
    }
}

/// One-shot LRE. Builds the estimator for `plan`; reuse
/// [`LinearRegressionEstimator`] when estimating many states.
pub fn lre_estimate(counts: &ShotCounts, plan: &MeasurementPlan) -> Result<LinearEstimate> {
    LinearRegressionEstimator::new(plan)?.estimate(counts)
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Nearest physical state in eigenvalue space: diagonalize, project the
/// spectrum onto the simplex, reassemble.
pub fn project_to_physical(est: &LinearEstimate) -> Result<DensityMatrix> {
    project_matrix(&est.matrix)
}

pub(crate) fn project_matrix(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = linalg::eig_hermitian(m)?;
    let values = project_simplex(&eig.values);
    let out = linalg::Eigendecomposition {
        values,
        vectors: eig.vectors,
    }
    .reconstruct();
    Ok(DensityMatrix::new_unchecked((&out + out.adjoint()).scale(0.5)))
}
