use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tso_core::linalg::{self, ComplexMatrix, ComplexVector};
use tso_core::process::b_permutation;
use tso_core::random::{random_gaussian_matrix, random_hermitian, random_unitary};
use tso_core::tomography::project_simplex;

/// Characteristic polynomial coefficients `c[0..=n]` of `det(lambda I - A)`,
/// leading coefficient first.
fn faddeev_leverrier(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.nrows();
    let mut c = vec![C64::new(1.0, 0.0)];
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + ComplexMatrix::identity(n, n) * c[k - 1];
        let ck = -(a * &m).trace() / k as f64;
        c.push(ck);
    }
    c
}

fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * 10.0).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(C64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
            break;
        }
    }
    // polish with Newton on the polynomial
    let deriv: Vec<C64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - i) as f64)
        .collect();
    let eval_d = |z: C64| deriv.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..5 {
            *r -= eval(*r) / eval_d(*r);
        }
    }
    roots
}

#[test]
fn hermitian_eigenvalues_match_characteristic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..5 {
        let h = random_hermitian(&mut rng, 8);
        let mut roots: Vec<f64> = durand_kerner(&faddeev_leverrier(&h)).iter().map(|z| z.re).collect();
        roots.sort_by(|a, b| b.total_cmp(a));
        let eig = linalg::eig_hermitian(&h).unwrap();
        for (a, b) in eig.values.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!((eig.reconstruct() - &h).norm() < 1e-12 * h.norm().max(1.0));
    }
}

/// `exp(-i H t)` by Taylor series with scaling and squaring.
fn taylor_expm(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let x = h * C64::new(0.0, -t);
    let s = (x.norm().log2().ceil().max(0.0) as i32) + 1;
    let y = x.unscale(2f64.powi(s));
    let n = h.nrows();
    let mut term = ComplexMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &y / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn propagator_matches_taylor_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for d in [2, 4, 8] {
        let h = random_hermitian(&mut rng, d);
        for t in [0.01, 0.3, 2.0] {
            let u = linalg::expm_neg_i_ht(&h, t).unwrap();
            let oracle = taylor_expm(&h, t);
            assert!((&u - &oracle).norm() < 1e-9, "d={d} t={t}");
        }
    }
}

#[test]
fn unitary_phases_match_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let h = random_hermitian(&mut rng, 6);
    let t = 0.2;
    let u = linalg::expm_neg_i_ht(&h, t).unwrap();
    let eig = linalg::eig_unitary(&u).unwrap();
    let mut phases: Vec<f64> = eig.values.iter().map(|z| z.arg()).collect();
    let mut expected: Vec<f64> = linalg::eig_hermitian(&h)
        .unwrap()
        .values
        .iter()
        .map(|l| -l * t)
        .collect();
    phases.sort_by(f64::total_cmp);
    expected.sort_by(f64::total_cmp);
    for (a, b) in phases.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((eig.reconstruct() - &u).norm() < 1e-10);
}

#[test]
fn eig_unitary_handles_degenerate_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let v = random_unitary(&mut rng, 4);
    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
        C64::from_polar(1.0, 0.3),
        C64::from_polar(1.0, 0.3),
        C64::from_polar(1.0, -0.3),
        C64::from_polar(1.0, 2.0),
    ]));
    let u = &v * diag * v.adjoint();
    let eig = linalg::eig_unitary(&u).unwrap();
    assert!((eig.reconstruct() - &u).norm() < 1e-10);
    assert!(linalg::unitarity_defect(&eig.vectors) < 1e-10);
}

#[test]
fn polar_factor_matches_inverse_square_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for d in [2, 3, 5] {
        let s = random_gaussian_matrix(&mut rng, d, d);
        let gram = s.adjoint() * &s;
        let eig = linalg::eig_hermitian(&gram).unwrap();
        let inv_sqrt = linalg::Eigendecomposition {
            values: eig.values.iter().map(|l| 1.0 / l.sqrt()).collect(),
            vectors: eig.vectors,
        }
        .reconstruct();
        let oracle = &s * inv_sqrt;
        let polar = linalg::polar_unitary_factor(&s).unwrap();
        assert!((&polar - &oracle).norm() < 1e-9, "d={d}");
        assert!(linalg::unitarity_defect(&polar) < 1e-12);
    }
}

#[test]
fn vec_of_product_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let (a, x, b) = (
        random_gaussian_matrix(&mut rng, 3, 4),
        random_gaussian_matrix(&mut rng, 4, 2),
        random_gaussian_matrix(&mut rng, 2, 5),
    );
    let lhs = linalg::vec(&(&a * &x * &b));
    let rhs = linalg::kron(&b.transpose(), &a) * linalg::vec(&x);
    assert!((lhs - rhs).norm() < 1e-12);
    assert_eq!(
        linalg::vec(&ComplexMatrix::from_row_slice(
            2,
            2,
            &[1.0, 2.0, 3.0, 4.0].map(|v| C64::new(v, 0.0))
        )),
        ComplexVector::from_vec([1.0, 3.0, 2.0, 4.0].map(|v| C64::new(v, 0.0)).to_vec())
    );
}

#[test]
fn kron_mixed_product_and_partial_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let g = |r: &mut ChaCha8Rng| random_gaussian_matrix(r, 3, 3);
    let (a, b, c, d) = (g(&mut rng), g(&mut rng), g(&mut rng), g(&mut rng));
    let lhs = linalg::kron(&a, &b) * linalg::kron(&c, &d);
    let rhs = linalg::kron(&(&a * &c), &(&b * &d));
    assert!((lhs - rhs).norm() < 1e-11);

    let ab = linalg::kron(&a, &b);
    assert!((linalg::partial_trace_1(&ab).unwrap() - &b * a.trace()).norm() < 1e-12);
    assert!((linalg::partial_trace_2(&ab).unwrap() - &a * b.trace()).norm() < 1e-12);
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), rows * cols)
        .prop_map(move |v| DMatrix::from_iterator(rows, cols, v.into_iter().map(|(r, i)| C64::new(r, i))))
}

proptest! {
    #[test]
    fn vec_unvec_round_trip(m in (1usize..6).prop_flat_map(|n| complex_matrix(n, n))) {
        prop_assert_eq!(linalg::unvec(&linalg::vec(&m)).unwrap(), m);
    }

    #[test]
    fn b_adjoint_inverts_b(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = b_permutation(d).unwrap();
        prop_assert!(b.is_bijection());
        let v: ComplexVector = random_gaussian_matrix(&mut rng, d.pow(4), 1).column(0).into();
        prop_assert_eq!(b.apply_adjoint(&b.apply(&v)), v);
    }

    #[test]
    fn simplex_projection_is_a_distribution(v in proptest::collection::vec(-5.0f64..5.0, 1..10)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(m in (2usize..7).prop_flat_map(|n| complex_matrix(n, n))) {
        let h = (&m + m.adjoint()).scale(0.5);
        let eig = linalg::eig_hermitian(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((eig.reconstruct() - &h).norm() <= 1e-10 * h.norm().max(1.0));
    }
}
