use std::path::Path;
use std::process::{Command, Output};

fn tso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tso"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn identify_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = tso(&["identify", "--repetitions", "2", "--shots", "20000", "--out", out_dir]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("identify: d=4"));
    let csv = std::fs::read_to_string(dir.path().join("identify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn time_outside_window_exits_3() {
    let out = tso(&["identify", "-t", "0.5", "--repetitions", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("assumption violation"));
    let out = tso(&["sweep-t", "--grid", "0.05,0.1,0.3", "--shots", "1000"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(code(&tso(&["identify", "--shots", "3"])), 2);
    assert_eq!(code(&tso(&["sweep-n", "--grid", "1000"])), 2);
    assert_eq!(code(&tso(&["sweep-q", "--grid", "1,2,6"])), 2);
    assert_eq!(code(&tso(&["identify", "--config", "/nonexistent.json"])), 2);
    assert_eq!(code(&tso(&["identify", "--bogus-flag"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"hamiltonian": {"kind": "pauli-z"}, "t": 0.1}"#).unwrap();
    assert_eq!(code(&tso(&["identify", "--config", cfg.to_str().unwrap()])), 2);

    let h = dir.path().join("h.txt");
    std::fs::write(&h, "3 3\n1 0 0 0 0 0\n0 0 1 0 0 0\n0 0 0 0 1 0\n").unwrap();
    assert_eq!(code(&tso(&["identify", "--hamiltonian", h.to_str().unwrap()])), 2);
}

#[test]
fn config_file_and_hamiltonian_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    std::fs::write(&h, "2 2\n1 0 0.5 0\n0.5 0 -1 0\n").unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"hamiltonian": {{"kind": "file", "path": {:?}}}, "t": 0.2, "shots": 900, "repetitions": 2, "exact": true}}"#,
            h.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = tso(&["identify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert!(row[4].parse::<f64>().unwrap() < 1e-20);
}

fn sweep_csv(dir: &Path, seed: &str) -> String {
    let out = tso(&[
        "sweep-n",
        "--grid",
        "300,1000,10000,30000",
        "--repetitions",
        "3",
        "--seed",
        seed,
        "--workers",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("sweep-n: 4 points, slope"));
    assert!(dir.join("sweep_n_rows.csv").exists());
    std::fs::read_to_string(dir.join("sweep_n.csv")).unwrap()
}

#[test]
fn sweep_output_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = sweep_csv(a.path(), "5");
    assert_eq!(first, sweep_csv(b.path(), "5"));
    assert!(first.starts_with("total_resources,grid_value,mean_mse"));
}

#[test]
fn selftest_passes() {
    let out = tso(&["selftest"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn dump_intermediates_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = tso(&[
        "identify",
        "--repetitions",
        "1",
        "--shots",
        "2000",
        "--dump-intermediates",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rep = dir.path().join("rep_000");
    for f in [
        "lambda.txt",
        "d.txt",
        "h_hat.txt",
        "counts_probe_000.csv",
        "counts_probe_021.csv",
    ] {
        assert!(rep.join(f).exists(), "{f}");
    }
}
