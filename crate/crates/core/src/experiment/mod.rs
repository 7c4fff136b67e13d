//! Experiment harness: configuration, end-to-end identification runs,
//! parameter sweeps and CSV export.

mod config;
mod pipeline;
mod stats;
mod sweep;

use std::io::Write;

pub use config::{ExperimentConfig, HamiltonianSource, SweepAxis};
pub use pipeline::{run_identification, IdentificationRecord, PreparedExperiment, StageTimings};
pub use stats::{fit_loglog_slope, SlopeFit};
pub use sweep::{run_sweep, sweep_qubits, sweep_resources, sweep_time, SweepKind, SweepPoint, SweepResult};

use crate::error::Result;

/// Column names of an identification record row.
pub const RECORD_COLUMNS: [&str; 9] = [
    "d",
    "t",
    "N",
    "seed",
    "mse_anchor_gauge",
    "mse_shift_min",
    "alpha1",
    "rank_one_residual",
    "wall_time_ms",
];

pub(crate) fn record_fields(r: &IdentificationRecord) -> Vec<String> {
    vec![
        r.d.to_string(),
        r.t.to_string(),
        r.n.to_string(),
        r.seed.to_string(),
        format!("{:e}", r.mse_anchor_gauge),
        format!("{:e}", r.mse_shift_min),
        r.alpha1.to_string(),
        format!("{:e}", r.rank_one_residual),
        format!("{:.3}", r.wall_time_ms),
    ]
}

/// One row per record, in the given order.
pub fn write_records_csv<W: Write>(records: &[IdentificationRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_COLUMNS)?;
    for r in records {
        out.write_record(record_fields(r))?;
    }
    out.flush()?;
    Ok(())
}
