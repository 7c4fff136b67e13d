use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tso_core::experiment::{
    run_identification, run_sweep, write_records_csv, ExperimentConfig, HamiltonianSource, SweepAxis, SweepResult,
};
use tso_core::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "tso", version, about = "Hamiltonian identification by two-step optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated identifications and write one CSV row per repetition.
    Identify(RunArgs),
    /// MSE against total resource count.
    SweepN(RunArgs),
    /// MSE against evolution time.
    SweepT(RunArgs),
    /// MSE against qubit count for the tensor-power fixture.
    SweepQ(RunArgs),
    /// Run the verification checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Use exact outcome probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    no_projection: bool,
    #[arg(long)]
    assume_hermitian_map: bool,
    #[arg(long)]
    dump_intermediates: Option<PathBuf>,
    /// Hamiltonian matrix file (replaces the configured source).
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Evolution time.
    #[arg(short, long)]
    t: Option<f64>,
    /// Copies per output state.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Smallest-eigenvalue anchor.
    #[arg(long)]
    h1: Option<f64>,
    /// Comma-separated sweep grid.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,
    #[arg(long)]
    max_qubits: Option<usize>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Identify,
    SweepN,
    SweepT,
    SweepQ,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Identify => "identify",
            Mode::SweepN => "sweep_n",
            Mode::SweepT => "sweep_t",
            Mode::SweepQ => "sweep_q",
        }
    }

    fn default_config(self) -> ExperimentConfig {
        let bench = HamiltonianSource::TwoQubitBenchmark;
        match self {
            Mode::Identify => ExperimentConfig::new(bench, 0.1, 729_000),
            Mode::SweepN => ExperimentConfig::new(bench, 0.1, 1000).with_sweep(SweepAxis::Shots(vec![
                1_000, 3_162, 10_000, 31_623, 100_000, 316_228, 1_000_000,
            ])),
            Mode::SweepT => ExperimentConfig::new(bench, 0.1, 729_000)
                .with_sweep(SweepAxis::Time(vec![0.01, 0.02, 0.04, 0.08, 0.16])),
            Mode::SweepQ => ExperimentConfig::new(HamiltonianSource::TensorPower { nqubits: 1 }, 0.01, 729_000)
                .with_sweep(SweepAxis::Qubits(vec![1, 2, 3])),
        }
    }
}

fn parse_grid<T: std::str::FromStr>(values: &[String]) -> Result<Vec<T>> {
    values
        .iter()
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid grid value {v:?}")))
        })
        .collect()
}

fn build_config(mode: Mode, a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => mode.default_config(),
    };
    if let Some(path) = &a.hamiltonian {
        cfg.hamiltonian = HamiltonianSource::File { path: path.clone() };
    }
    if let Some(v) = a.seed {
        cfg.root_seed = v;
    }
    if let Some(v) = a.workers {
        cfg.workers = v;
    }
    if let Some(v) = a.t {
        cfg.t = v;
    }
    if let Some(v) = a.shots {
        cfg.shots = v;
    }
    if let Some(v) = a.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = a.max_qubits {
        cfg.max_qubits = v;
    }
    if a.h1.is_some() {
        cfg.h1 = a.h1;
    }
    if a.dump_intermediates.is_some() {
        cfg.dump_intermediates = a.dump_intermediates.clone();
    }
    cfg.exact |= a.exact;
    cfg.no_projection |= a.no_projection;
    cfg.assume_hermitian_map |= a.assume_hermitian_map;

    if let Some(grid) = &a.grid {
        cfg.sweep = Some(match mode {
            Mode::SweepN => SweepAxis::Shots(parse_grid(grid)?),
            Mode::SweepT => SweepAxis::Time(parse_grid(grid)?),
            Mode::SweepQ => SweepAxis::Qubits(parse_grid(grid)?),
            Mode::Identify => return Err(Error::Config("--grid applies to sweep commands only".into())),
        });
    }
    let axis_ok = match (mode, &cfg.sweep) {
        (Mode::Identify, _) => true,
        (Mode::SweepN, Some(SweepAxis::Shots(_)))
        | (Mode::SweepT, Some(SweepAxis::Time(_)))
        | (Mode::SweepQ, Some(SweepAxis::Qubits(_))) => true,
        (_, None) => {
            cfg.sweep = mode.default_config().sweep;
            true
        }
        _ => false,
    };
    if !axis_ok {
        return Err(Error::Config(format!(
            "configured sweep axis does not match `{}`",
            mode.name().replace('_', "-")
        )));
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<File> {
    std::fs::create_dir_all(dir)?;
    Ok(File::create(dir.join(name))?)
}

fn identify(a: &RunArgs) -> Result<()> {
    let cfg = build_config(Mode::Identify, a)?;
    let records = run_identification(&cfg)?;
    let mean = records.iter().map(|r| r.mse_anchor_gauge).sum::<f64>() / records.len() as f64;
    let summary = format!(
        "identify: d={} t={} N={} repetitions={} mean MSE {:.6e}",
        records[0].d,
        cfg.t,
        records[0].n,
        records.len(),
        mean
    );
    match &a.out {
        Some(dir) => {
            write_records_csv(&records, create(dir, "identify.csv")?)?;
            println!("{summary}");
        }
        None => {
            write_records_csv(&records, std::io::stdout().lock())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn sweep(mode: Mode, a: &RunArgs) -> Result<()> {
    let cfg = build_config(mode, a)?;
    let result: SweepResult = run_sweep(&cfg)?;
    match &a.out {
        Some(dir) => {
            result.write_points_csv(create(dir, &format!("{}.csv", mode.name()))?)?;
            result.write_rows_csv(create(dir, &format!("{}_rows.csv", mode.name()))?)?;
            println!("{}", result.summary());
        }
        None => {
            result.write_points_csv(std::io::stdout().lock())?;
            eprintln!("{}", result.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Identify(a) => identify(a),
        Command::SweepN(a) => sweep(Mode::SweepN, a),
        Command::SweepT(a) => sweep(Mode::SweepT, a),
        Command::SweepQ(a) => sweep(Mode::SweepQ, a),
        Command::Selftest { seed } => {
            let reports = selftest::run_all(*seed);
            for r in &reports {
                println!("{r}");
            }
            if reports.iter().all(|r| r.passed()) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
