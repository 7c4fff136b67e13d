use std::io::Write;

use crate::error::{Error, Result, Stage};
use crate::quantum::Hamiltonian;
use crate::tso::check_evolution_time;

use super::config::{ExperimentConfig, HamiltonianSource, SweepAxis};
use super::pipeline::{run_parallel, IdentificationRecord, PreparedExperiment};
use super::stats::{fit_loglog_slope, mean, std_dev, SlopeFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// x is the total resource count `N_t`.
    Resources,
    /// x is the evolution time.
    Time,
    /// x is the dimension `2^N_q`.
    Qubits,
}

impl SweepKind {
    pub fn x_label(self) -> &'static str {
        match self {
            SweepKind::Resources => "total_resources",
            SweepKind::Time => "t",
            SweepKind::Qubits => "d",
        }
    }
}

/// Aggregate over the repetitions at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    /// Grid value as configured (`N`, `t` or `N_q`).
    pub grid_value: f64,
    /// Mean anchor-gauge squared error.
    pub mean_mse: f64,
    pub mean_log10_mse: f64,
    pub std_log10_mse: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    /// OLS on `(log10 x, log10 mean_mse)`.
    pub fit: SlopeFit,
    /// Every repetition, grouped by grid point then repetition index.
    pub rows: Vec<(usize, IdentificationRecord)>,
}

impl SweepResult {
    pub fn summary(&self) -> String {
        let name = match self.kind {
            SweepKind::Resources => "sweep-n",
            SweepKind::Time => "sweep-t",
            SweepKind::Qubits => "sweep-q",
        };
        format!(
            "{name}: {} points, slope {} (log10 MSE vs log10 {})",
            self.points.len(),
            self.fit,
            self.kind.x_label()
        )
    }

    /// Columns: x label, grid value, mean_mse, mean_log10_mse, std_log10_mse.
    pub fn write_points_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            self.kind.x_label(),
            "grid_value",
            "mean_mse",
            "mean_log10_mse",
            "std_log10_mse",
        ])?;
        for p in &self.points {
            out.write_record([
                p.x.to_string(),
                p.grid_value.to_string(),
                format!("{:e}", p.mean_mse),
                p.mean_log10_mse.to_string(),
                p.std_log10_mse.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Per-repetition rows: `point` followed by the identification columns.
    pub fn write_rows_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["point"];
        header.extend_from_slice(&super::RECORD_COLUMNS);
        out.write_record(&header)?;
        for (i, rec) in &self.rows {
            let mut row = vec![i.to_string()];
            row.extend(super::record_fields(rec));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn require_axis(cfg: &ExperimentConfig, want: &str) -> Result<SweepAxis> {
    match (&cfg.sweep, want) {
        (Some(a @ SweepAxis::Shots(_)), "shots")
        | (Some(a @ SweepAxis::Time(_)), "time")
        | (Some(a @ SweepAxis::Qubits(_)), "qubits") => Ok(a.clone()),
        (Some(other), _) => Err(Error::Config(format!("expected a {want} sweep, config has {other:?}"))),
        (None, _) => Err(Error::Config(format!("config has no {want} sweep grid"))),
    }
}

fn run_grid(kind: SweepKind, cfg: &ExperimentConfig, grid: Vec<(f64, f64, PreparedExperiment)>) -> Result<SweepResult> {
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| (0..cfg.repetitions).map(move |r| (i, r)))
        .collect();
    let records = run_parallel(cfg.workers, &tasks, |&(i, r)| grid[i].2.run(r))?;
    let mut rows: Vec<(usize, IdentificationRecord)> = tasks.iter().map(|&(i, _)| i).zip(records).collect();
    rows.sort_by_key(|(i, rec)| (*i, rec.repetition));

    let mut points = Vec::with_capacity(grid.len());
    for (i, (x, grid_value, _)) in grid.iter().enumerate() {
        let mses: Vec<f64> = rows
            .iter()
            .filter(|(p, _)| *p == i)
            .map(|(_, r)| r.mse_anchor_gauge)
            .collect();
        let logs: Vec<f64> = mses.iter().map(|m| m.max(f64::MIN_POSITIVE).log10()).collect();
        points.push(SweepPoint {
            x: *x,
            grid_value: *grid_value,
            mean_mse: mean(&mses),
            mean_log10_mse: mean(&logs),
            std_log10_mse: std_dev(&logs),
        });
    }
    let fit = fit_loglog_slope(&points.iter().map(|p| (p.x, p.mean_mse)).collect::<Vec<_>>())
        .map_err(|e| Error::DegenerateData(format!("slope fit failed: {e}")).at(Stage::Metrics))?;
    Ok(SweepResult {
        kind,
        points,
        fit,
        rows,
    })
}

/// MSE against total resources `N_t = (3d^2 - d)/2 * N`.
pub fn sweep_resources(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let SweepAxis::Shots(grid) = require_axis(cfg, "shots")? else {
        unreachable!()
    };
    if grid.len() < 4 {
        return Err(Error::Config(format!(
            "shots grid needs at least 4 points, got {}",
            grid.len()
        )));
    }
    let (lo, hi) = (*grid.iter().min().unwrap(), *grid.iter().max().unwrap());
    if lo == 0 || (hi as f64 / lo as f64) < 100.0 {
        return Err(Error::Config(format!(
            "shots grid [{lo}, {hi}] must span at least 2 decades"
        )));
    }
    let h = cfg.hamiltonian.load()?;
    let prepared = grid
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.shots = n;
            let p = PreparedExperiment::with_hamiltonian(&c, h.clone())?;
            Ok((p.total_resources() as f64, n as f64, p))
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(SweepKind::Resources, cfg, prepared)
}

/// MSE against evolution time. Every grid point is checked before sampling.
pub fn sweep_time(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let SweepAxis::Time(grid) = require_axis(cfg, "time")? else {
        unreachable!()
    };
    if grid.len() < 3 {
        return Err(Error::Config(format!(
            "time grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    let h = cfg.hamiltonian.load()?;
    for &t in &grid {
        let report = check_evolution_time(&h, t, None);
        if !report.valid {
            return Err(
                Error::AssumptionViolation(format!("grid time t={t} is outside (0, {:.6})", report.bound))
                    .at(Stage::Config),
            );
        }
    }
    let prepared = grid
        .iter()
        .map(|&t| {
            let mut c = cfg.clone();
            c.t = t;
            Ok((t, t, PreparedExperiment::with_hamiltonian(&c, h.clone())?))
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(SweepKind::Time, cfg, prepared)
}

/// MSE against qubit count for the tensor-power fixture. The configured
/// Hamiltonian source is ignored.
pub fn sweep_qubits(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let SweepAxis::Qubits(grid) = require_axis(cfg, "qubits")? else {
        unreachable!()
    };
    if grid.len() < 3 {
        return Err(Error::Config(format!(
            "qubit grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if let Some(&n) = grid.iter().find(|&&n| n > cfg.max_qubits) {
        return Err(Error::Config(format!(
            "{n} qubits exceeds the configured maximum of {}",
            cfg.max_qubits
        )));
    }
    let hs = grid
        .iter()
        .map(|&n| Hamiltonian::tensor_power_fixture(n).map_err(|e| Error::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    for (h, &n) in hs.iter().zip(&grid) {
        if !check_evolution_time(h, cfg.t, None).valid {
            return Err(
                Error::AssumptionViolation(format!("t={} is outside the window at {n} qubits", cfg.t))
                    .at(Stage::Config),
            );
        }
    }
    let prepared = grid
        .iter()
        .zip(hs)
        .map(|(&n, h)| {
            let mut c = cfg.clone();
            c.hamiltonian = HamiltonianSource::TensorPower { nqubits: n };
            let p = PreparedExperiment::with_hamiltonian(&c, h)?;
            Ok((p.dim() as f64, n as f64, p))
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(SweepKind::Qubits, cfg, prepared)
}

/// Dispatch on the configured sweep axis.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    match cfg.sweep {
        Some(SweepAxis::Shots(_)) => sweep_resources(cfg),
        Some(SweepAxis::Time(_)) => sweep_time(cfg),
        Some(SweepAxis::Qubits(_)) => sweep_qubits(cfg),
        None => Err(Error::Config("config has no sweep grid".into())),
    }
}
