use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{chain_hamiltonian, pauli_z, Hamiltonian};

/// Where the ground-truth Hamiltonian comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSource {
    /// Matrix text file with optional `h1` line.
    File {
        path: PathBuf,
    },
    /// The 4x4 benchmark Hamiltonian with spectral spread ~11.95.
    TwoQubitBenchmark,
    /// Single-qubit `sigma_z`.
    PauliZ,
    /// `[[1, 0.9+0.9i], [0.9-0.9i, 2]]` to the given tensor power.
    TensorPower {
        nqubits: usize,
    },
    /// GUE draw rescaled to spectral spread `spread`.
    Random {
        seed: u64,
        dim: usize,
        spread: f64,
    },
    Chain {
        omegas: Vec<f64>,
        deltas: Vec<f64>,
    },
}

impl HamiltonianSource {
    pub fn load(&self) -> Result<Hamiltonian> {
        match self {
            HamiltonianSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read Hamiltonian file {}: {e}", path.display())))?;
                Hamiltonian::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            }
            HamiltonianSource::TwoQubitBenchmark => Ok(Hamiltonian::two_qubit_benchmark()),
            HamiltonianSource::PauliZ => Hamiltonian::new(pauli_z()),
            HamiltonianSource::TensorPower { nqubits } => Hamiltonian::tensor_power_fixture(*nqubits),
            HamiltonianSource::Random { seed, dim, spread } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Hamiltonian::random(&mut rng, *dim, *spread)
            }
            HamiltonianSource::Chain { omegas, deltas } => chain_hamiltonian(omegas.len(), omegas, deltas),
        }
        .map_err(|e| match e {
            e @ Error::Config(_) => e,
            e => Error::Config(format!("invalid Hamiltonian: {e}")),
        })
    }
}

/// Grid for a one-dimensional sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Copies per output state.
    Shots(Vec<u64>),
    /// Evolution times.
    Time(Vec<f64>),
    /// Qubit counts for the tensor-power fixture.
    Qubits(Vec<usize>),
}

fn default_repetitions() -> usize {
    10
}

fn default_workers() -> usize {
    1
}

fn default_max_qubits() -> usize {
    5
}

/// Everything needed to run an identification experiment. Loaded from JSON;
/// omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianSource,
    /// Evolution time.
    pub t: f64,
    /// Copies per output state, split across measurement settings.
    pub shots: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepAxis>,
    /// Feed raw linear estimates (not projected to physical states) downstream.
    #[serde(default)]
    pub no_projection: bool,
    /// Recover `E(|k><j|)` as `E(|j><k|)^dag`, dropping one probe per pair.
    #[serde(default)]
    pub assume_hermitian_map: bool,
    /// Use exact outcome probabilities instead of sampled frequencies.
    #[serde(default)]
    pub exact: bool,
    /// Smallest-eigenvalue anchor; defaults to the file's `h1` line, then to
    /// the true smallest eigenvalue.
    #[serde(default)]
    pub h1: Option<f64>,
    #[serde(default)]
    pub dump_intermediates: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
}

impl ExperimentConfig {
    pub fn new(hamiltonian: HamiltonianSource, t: f64, shots: u64) -> Self {
        ExperimentConfig {
            hamiltonian,
            t,
            shots,
            repetitions: default_repetitions(),
            root_seed: 0,
            sweep: None,
            no_projection: false,
            assume_hermitian_map: false,
            exact: false,
            h1: None,
            dump_intermediates: None,
            workers: default_workers(),
            max_qubits: default_max_qubits(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.root_seed = seed;
        self
    }

    pub fn with_sweep(mut self, sweep: SweepAxis) -> Self {
        self.sweep = Some(sweep);
        self
    }

    pub fn exact(mut self) -> Self {
        self.exact = true;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"kind": "two-qubit-benchmark"}, "t": 0.1, "shots": 729000}"#,
        )
        .unwrap();
        assert_eq!(cfg.repetitions, 10);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.max_qubits, 5);
        assert!(!cfg.exact && cfg.sweep.is_none());
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn json_sweep_and_sources() {
        let cfg = ExperimentConfig::from_json(
            r#"{"hamiltonian": {"kind": "random", "seed": 3, "dim": 4, "spread": 2.0},
                "t": 0.5, "shots": 1000, "sweep": {"axis": "time", "values": [0.1, 0.2]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.sweep, Some(SweepAxis::Time(vec![0.1, 0.2])));
        assert_eq!(cfg.hamiltonian.load().unwrap().dim(), 4);
        assert!(ExperimentConfig::from_json(r#"{"t": 0.1}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"hamiltonian": {"kind": "pauli-z"}, "t": 0.1, "shots": 9, "bogus": 1}"#
        )
        .is_err());
    }

    #[test]
    fn missing_file_is_config_error() {
        let src = HamiltonianSource::File {
            path: "/nonexistent/h.txt".into(),
        };
        assert!(matches!(src.load(), Err(Error::Config(_))));
    }
}
