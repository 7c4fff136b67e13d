//! Experiments are described by JSON. Omitted fields take defaults.
//!
//! cargo run --release --example json_config

use tso_core::experiment::{run_identification, write_records_csv, ExperimentConfig};

const CONFIG: &str = r#"{
    "hamiltonian": {"kind": "chain", "omegas": [1.0, 0.7], "deltas": [0.3]},
    "t": 0.4,
    "shots": 50000,
    "repetitions": 3,
    "root_seed": 9
}"#;

fn main() -> tso_core::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    println!("resolved config:\n{}\n", cfg.to_json());
    write_records_csv(&run_identification(&cfg)?, std::io::stdout().lock())?;
    Ok(())
}
