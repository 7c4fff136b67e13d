use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tso_core::experiment::{
    fit_loglog_slope, run_identification, write_records_csv, ExperimentConfig, HamiltonianSource, PreparedExperiment,
};
use tso_core::linalg;
use tso_core::process::compute_lambda;
use tso_core::quantum::{natural_basis, Hamiltonian};
use tso_core::tomography::ShotCounts;
use tso_core::tso::identify_from_lambda;
use tso_core::Error;

fn without_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn csv_of(cfg: &ExperimentConfig) -> String {
    let mut buf = Vec::new();
    write_records_csv(&run_identification(cfg).unwrap(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn identical_config_gives_identical_csv() {
    let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 10_000)
        .with_repetitions(4)
        .with_seed(99);
    let a = csv_of(&cfg);
    let b = csv_of(&cfg.clone().with_workers(4));
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    assert_ne!(
        without_wall_time(&a),
        without_wall_time(&csv_of(&cfg.clone().with_seed(100)))
    );
    assert_eq!(
        a.lines().next().unwrap(),
        "d,t,N,seed,mse_anchor_gauge,mse_shift_min,alpha1,rank_one_residual,wall_time_ms"
    );
}

#[test]
fn error_decreases_with_shots() {
    let mse = |n| {
        let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, n)
            .with_repetitions(5)
            .with_seed(1);
        let recs = run_identification(&cfg).unwrap();
        recs.iter().map(|r| r.mse_anchor_gauge).sum::<f64>() / recs.len() as f64
    };
    let (lo, hi) = (mse(10_000), mse(1_000_000));
    assert!(hi < lo / 10.0, "{lo} -> {hi}");
}

#[test]
fn shift_minimized_error_never_exceeds_anchor_error() {
    let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 5_000).with_repetitions(5);
    for r in run_identification(&cfg).unwrap() {
        assert!(r.mse_shift_min <= r.mse_anchor_gauge + 1e-15);
        assert!(r.alpha1 > 0.0);
    }
}

#[test]
fn intermediates_are_written_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(HamiltonianSource::PauliZ, 0.3, 3_000).with_repetitions(2);
    cfg.dump_intermediates = Some(dir.path().to_path_buf());
    let recs = run_identification(&cfg).unwrap();
    let rep = dir.path().join("rep_001");
    for p in 0..5 {
        let f = std::fs::File::open(rep.join(format!("counts_probe_{p:03}.csv"))).unwrap();
        assert_eq!(ShotCounts::read_csv(f).unwrap().total_shots(), 3_000);
    }
    let read = |name: &str| {
        linalg::read_matrix(std::io::BufReader::new(std::fs::File::open(rep.join(name)).unwrap())).unwrap()
    };
    let (lam, d, h_hat) = (read("lambda.txt"), read("d.txt"), read("h_hat.txt"));
    assert_eq!((lam.shape(), d.shape()), ((4, 4), (4, 4)));
    assert_eq!(h_hat, recs[1].h_hat);

    // reprocessing the dumped Lambda reproduces the estimate
    let h1 = Hamiltonian::new(tso_core::quantum::pauli_z())
        .unwrap()
        .smallest_eigenvalue();
    let again = identify_from_lambda(&tso_core::process::LambdaMatrix(lam), 0.3, h1).unwrap();
    assert!((again.estimate.h_hat - &recs[1].h_hat).norm() < 1e-12);
}

#[test]
fn hermitian_map_probe_set_is_smaller_and_still_accurate() {
    let mut cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 81)
        .exact()
        .with_repetitions(1);
    cfg.assume_hermitian_map = true;
    let p = PreparedExperiment::new(&cfg).unwrap();
    assert_eq!(p.num_probes(), 16);
    assert!(p.run(0).unwrap().mse_anchor_gauge < 1e-16);
}

#[test]
fn unprojected_estimates_also_identify() {
    let mut cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.1, 729_000).with_repetitions(3);
    cfg.no_projection = true;
    for r in run_identification(&cfg).unwrap() {
        assert!(r.mse_anchor_gauge < 1e-2);
    }
}

#[test]
fn lambda_of_exact_outputs_round_trips() {
    let h = Hamiltonian::two_qubit_benchmark();
    let u = h.propagator(0.1);
    let basis = natural_basis(4).unwrap();
    let outs: Vec<_> = basis.elements().iter().map(|e| &u * e * u.adjoint()).collect();
    let lam = compute_lambda(&outs, &basis).unwrap();
    let id = identify_from_lambda(&lam, 0.1, h.smallest_eigenvalue()).unwrap();
    assert!((id.estimate.h_hat - h.matrix()).norm() < 1e-9);
}

#[test]
fn stage_labels_survive_to_the_caller() {
    let cfg = ExperimentConfig::new(HamiltonianSource::TwoQubitBenchmark, 0.3, 1000);
    let err = run_identification(&cfg).unwrap_err();
    assert!(matches!(err.root(), Error::AssumptionViolation(_)));
    assert!(err.to_string().contains("config"), "{err}");
}

#[test]
fn slope_fit_on_noisy_power_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = (0..12)
        .map(|i| {
            let x = 10f64.powf(3.0 + 0.25 * i as f64);
            (x, 5.0 / x * (1.0 + 0.05 * rng.random_range(-1.0..1.0)))
        })
        .collect();
    let fit = fit_loglog_slope(&pts).unwrap();
    assert!((fit.slope + 1.0).abs() < 0.1, "{fit}");
    assert!(fit.stderr < 0.05);
}
