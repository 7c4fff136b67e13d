use std::fmt;

use thiserror::Error;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Evolution,
    Measurement,
    StateEstimation,
    Assembly,
    ProcessMatrix,
    RankOneFit,
    UnitaryFit,
    Logarithm,
    Metrics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Evolution => "evolution",
            Stage::Measurement => "measurement",
            Stage::StateEstimation => "state-estimation",
            Stage::Assembly => "assembly",
            Stage::ProcessMatrix => "process-matrix",
            Stage::RankOneFit => "rank-one-fit",
            Stage::UnitaryFit => "unitary-fit",
            Stage::Logarithm => "logarithm",
            Stage::Metrics => "metrics",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not Hermitian (deviation {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix is not unitary (deviation {deviation:.3e} > {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },
    #[error("unphysical state: {0}")]
    Unphysical(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("stage {stage}: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::AtStage { .. } => e,
            e => Error::AtStage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code: 2 configuration, 3 assumption violation, 4 degenerate data.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::AssumptionViolation(_) => 3,
            Error::DegenerateData(_) => 4,
            _ => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
