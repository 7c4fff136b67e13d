use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result, Stage, StageExt};
use crate::linalg::{self, ComplexMatrix};
use crate::process::{self, apply_b_dagger, b_permutation, compute_lambda, PermutationB};
use crate::quantum::{evolve, natural_basis, probe_set, probe_set_hermitian_map, Hamiltonian, NaturalBasis, ProbeSet};
use crate::random::derive_seed;
use crate::tomography::{
    cube_plan_with_total, exact_frequencies, project_matrix, simulate_counts, LinearRegressionEstimator,
    MeasurementPlan,
};
use crate::tso::{check_evolution_time, gauge_aligned_error, identify_from_data, FitWarning};

use super::config::ExperimentConfig;

/// Wall time spent per pipeline stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub evolution_ms: f64,
    pub measurement_ms: f64,
    pub state_estimation_ms: f64,
    pub process_matrix_ms: f64,
    /// Rank-one fit, unitary fit and logarithm.
    pub tso_ms: f64,
}

/// One identification run.
#[derive(Debug, Clone)]
pub struct IdentificationRecord {
    pub d: usize,
    pub t: f64,
    /// Copies per output state.
    pub n: u64,
    pub repetition: usize,
    pub seed: u64,
    pub mse_anchor_gauge: f64,
    pub mse_shift_min: f64,
    pub alpha1: f64,
    pub rank_one_residual: f64,
    pub wall_time_ms: f64,
    pub timings: StageTimings,
    pub warnings: Vec<FitWarning>,
    pub h_hat: ComplexMatrix,
}

/// Validated, immutable experiment state shared by all repetitions.
#[derive(Debug)]
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub hamiltonian: Hamiltonian,
    pub h1: f64,
    basis: NaturalBasis,
    probes: ProbeSet,
    plan: MeasurementPlan,
    estimator: LinearRegressionEstimator,
    permutation: PermutationB,
    propagator: ComplexMatrix,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

impl PreparedExperiment {
    /// Load the Hamiltonian, check the evolution-time window and build all
    /// plan-dependent state. Nothing is sampled here.
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let hamiltonian = config.hamiltonian.load()?;
        Self::with_hamiltonian(config, hamiltonian)
    }

    pub fn with_hamiltonian(config: &ExperimentConfig, hamiltonian: Hamiltonian) -> Result<Self> {
        let d = hamiltonian.dim();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Config(format!(
                "cube measurements need a qubit register; dimension {d} is not a power of two >= 2"
            )));
        }
        let nqubits = d.trailing_zeros() as usize;
        if nqubits > config.max_qubits {
            return Err(Error::Config(format!(
                "{nqubits} qubits exceeds the configured maximum of {}",
                config.max_qubits
            )));
        }
        if config.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        let report = check_evolution_time(&hamiltonian, config.t, None);
        if !report.valid {
            return Err(Error::AssumptionViolation(format!(
                "evolution time t={} is outside (0, {:.6}) for spectral spread {:.6}",
                config.t,
                report.bound,
                hamiltonian.spectral_spread()
            ))
            .at(Stage::Config));
        }
        let h1 = config
            .h1
            .or(hamiltonian.h1_anchor())
            .unwrap_or_else(|| hamiltonian.smallest_eigenvalue());
        let plan = cube_plan_with_total(nqubits, config.shots).stage(Stage::Config)?;
        let estimator = LinearRegressionEstimator::new(&plan).stage(Stage::Config)?;
        let probes = if config.assume_hermitian_map {
            probe_set_hermitian_map(d)?
        } else {
            probe_set(d)?
        };
        Ok(PreparedExperiment {
            config: config.clone(),
            propagator: hamiltonian.propagator(config.t),
            hamiltonian,
            h1,
            basis: natural_basis(d)?,
            probes,
            plan,
            estimator,
            permutation: b_permutation(d)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn num_probes(&self) -> usize {
        self.probes.len()
    }

    /// `N_t`: total probe copies per run.
    pub fn total_resources(&self) -> u64 {
        self.probes.len() as u64 * self.plan.total_shots()
    }

    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        derive_seed(self.config.root_seed, &[repetition as u64])
    }

    fn dump_dir(&self, repetition: usize) -> Option<PathBuf> {
        self.config
            .dump_intermediates
            .as_ref()
            .map(|dir| dir.join(format!("rep_{repetition:03}")))
    }

    /// One full run. Probe `p` of repetition `r` measures setting `s` with
    /// the stream `derive_seed(derive_seed(root, [r, p]), [s])`.
    pub fn run(&self, repetition: usize) -> Result<IdentificationRecord> {
        let start = Instant::now();
        let mut timings = StageTimings::default();
        let dump = self.dump_dir(repetition);
        if let Some(dir) = &dump {
            std::fs::create_dir_all(dir)?;
        }

        let mut outputs = Vec::with_capacity(self.probes.len());
        for (p, probe) in self.probes.probes().iter().enumerate() {
            let t0 = Instant::now();
            let out = evolve(probe, &self.propagator).stage(Stage::Evolution)?;
            timings.evolution_ms += ms_since(t0);

            let t0 = Instant::now();
            let freqs = if self.config.exact {
                exact_frequencies(&out, &self.plan).stage(Stage::Measurement)?
            } else {
                let seed = derive_seed(self.config.root_seed, &[repetition as u64, p as u64]);
                let counts = simulate_counts(&out, &self.plan, seed).stage(Stage::Measurement)?;
                if let Some(dir) = &dump {
                    let f = std::fs::File::create(dir.join(format!("counts_probe_{p:03}.csv")))?;
                    counts.write_csv(f)?;
                }
                counts.frequencies()
            };
            timings.measurement_ms += ms_since(t0);

            let t0 = Instant::now();
            let raw = self
                .estimator
                .estimate_frequencies(&freqs)
                .stage(Stage::StateEstimation)?;
            let est = if self.config.no_projection {
                raw
            } else {
                project_matrix(&raw).stage(Stage::StateEstimation)?.into_matrix()
            };
            timings.state_estimation_ms += ms_since(t0);
            outputs.push(est);
        }

        let t0 = Instant::now();
        let assembled = self.probes.assemble_all(&outputs).stage(Stage::Assembly)?;
        let lam = compute_lambda(&assembled, &self.basis).stage(Stage::ProcessMatrix)?;
        let data = apply_b_dagger(&lam, &self.permutation).stage(Stage::ProcessMatrix)?;
        timings.process_matrix_ms = ms_since(t0);

        let t0 = Instant::now();
        let id = identify_from_data(&data, self.config.t, self.h1)?;
        timings.tso_ms = ms_since(t0);

        if let Some(dir) = &dump {
            process::dump_intermediates(dir, &lam, &data)?;
            std::fs::write(dir.join("h_hat.txt"), linalg::matrix_to_string(&id.estimate.h_hat))?;
        }

        let err = gauge_aligned_error(&id.estimate, &self.hamiltonian).stage(Stage::Metrics)?;
        let mut warnings = id.rank_one.warnings.clone();
        warnings.extend(id.unitary.warnings.iter().cloned());
        Ok(IdentificationRecord {
            d: self.dim(),
            t: self.config.t,
            n: self.plan.total_shots(),
            repetition,
            seed: self.repetition_seed(repetition),
            mse_anchor_gauge: err.anchor_gauge,
            mse_shift_min: err.shift_minimized,
            alpha1: id.rank_one.alpha1,
            rank_one_residual: id.rank_one.residual,
            wall_time_ms: ms_since(start),
            timings,
            warnings,
            h_hat: id.estimate.h_hat,
        })
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Run `f` over `items` on `workers` threads; results come back in input order.
pub(crate) fn run_parallel<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    pool(workers)?.install(|| items.par_iter().map(f).collect())
}

/// Run every repetition of `cfg`. Records are ordered by repetition index.
pub fn run_identification(cfg: &ExperimentConfig) -> Result<Vec<IdentificationRecord>> {
    let prepared = PreparedExperiment::new(cfg)?;
    let reps: Vec<usize> = (0..cfg.repetitions).collect();
    run_parallel(cfg.workers, &reps, |&r| prepared.run(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::HamiltonianSource;

    #[test]
    fn exact_mode_is_noiseless() {
        let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 729_000)
            .exact()
            .with_repetitions(1);
        let recs = run_identification(&cfg).unwrap();
        assert!(recs[0].mse_anchor_gauge < 1e-16, "{}", recs[0].mse_anchor_gauge);
    }

    #[test]
    fn rejects_time_outside_window() {
        let cfg = ExperimentConfig::new(HamiltonianSource::PauliZ, 2.0, 1000);
        let err = PreparedExperiment::new(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn rejects_too_few_shots() {
        let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 5);
        assert_eq!(PreparedExperiment::new(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn noisy_run_is_reproducible() {
        let cfg = ExperimentConfig::new(HamiltonianSource::PauliZ, 0.3, 3000)
            .with_repetitions(3)
            .with_seed(17);
        let a = run_identification(&cfg).unwrap();
        let b = run_identification(&cfg.clone().with_workers(3)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mse_anchor_gauge, y.mse_anchor_gauge);
            assert_eq!(x.h_hat, y.h_hat);
        }
        assert_ne!(a[0].mse_anchor_gauge, a[1].mse_anchor_gauge);
    }
}
