use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spwt_core::linalg::{hermitian_eigen, normalized, outer, quad_form, trace_product, CMat, CVec};
use spwt_core::optimizer::{
    rank_one_extract, sca_solve, sca_solve_from, solve_maxmin_ratio, ExtractionMethod,
    MaxMinRatioProblem, SolverSettings,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|v| c(*v, 0.0))))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Sum of `rank` random outer products: PSD and rank deficient.
fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for _ in 0..rank {
        m += outer(&random_vec(rng, n));
    }
    m
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    random_psd(rng, n, n) + CMat::identity(n, n).scale(0.1)
}

/// `lambda_max(B^{-1/2} A B^{-1/2})` through the eigendecomposition of `B`.
fn generalized_eigen_oracle(a: &CMat, b: &CMat) -> f64 {
    let e = hermitian_eigen(b);
    let n = b.nrows();
    let mut inv_sqrt = CMat::zeros(n, n);
    for k in 0..n {
        let u = e.vectors.column(k).into_owned();
        inv_sqrt += outer(&u).scale(1.0 / e.values[k].sqrt());
    }
    hermitian_eigen(&(&inv_sqrt * a * &inv_sqrt)).values[0]
}

fn random_problem(seed: u64, n: usize, m: usize, shared: bool) -> MaxMinRatioProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..m).map(|_| random_psd(&mut rng, n, 2)).collect();
    let b = if shared {
        vec![random_pd(&mut rng, n)]
    } else {
        (0..m).map(|_| random_pd(&mut rng, n)).collect()
    };
    MaxMinRatioProblem::new(a, b).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_term_matches_generalized_eigen_oracle() {
    let settings = SolverSettings::default();
    for seed in 0..5 {
        let p = random_problem(seed, 6, 1, false);
        let oracle = generalized_eigen_oracle(&p.numerators()[0], &p.denominators()[0]);
        let bis = solve_maxmin_ratio(&p, &settings).unwrap();
        assert!(rel(bis.value, oracle) <= 1e-6, "bisection {} vs {}", bis.value, oracle);
        assert!(rel(p.min_ratio(&bis.matrix), oracle) <= 1e-6);
        let sca = sca_solve(&p, &settings, seed).unwrap();
        assert!(rel(sca.value, oracle) <= 1e-6, "sca {} vs {}", sca.value, oracle);
    }
}

#[test]
fn complementary_terms_reach_one_at_half_identity() {
    let p = MaxMinRatioProblem::new(vec![diag(&[2.0, 0.0]), diag(&[0.0, 2.0])], vec![diag(&[1.0, 1.0])])
        .unwrap();
    let settings = SolverSettings::default();
    let bis = solve_maxmin_ratio(&p, &settings).unwrap();
    assert!((bis.value - 1.0).abs() <= 1e-6);
    assert!((&bis.matrix - diag(&[0.5, 0.5])).norm() <= 1e-6);
    let sca = sca_solve(&p, &settings, 0).unwrap();
    assert!((sca.value - 1.0).abs() <= 1e-6);
    let ext = rank_one_extract(&bis.matrix, &p, 100, 3);
    assert_eq!(ext.method, ExtractionMethod::Randomized);
    assert!((ext.min_ratio - 1.0).abs() <= 1e-6);
}

#[test]
fn identical_numerator_and_denominator_give_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b: Vec<CMat> = (0..2).map(|_| random_pd(&mut rng, 4)).collect();
    let p = MaxMinRatioProblem::new(b.clone(), b).unwrap();
    let settings = SolverSettings::default();
    assert!((solve_maxmin_ratio(&p, &settings).unwrap().value - 1.0).abs() <= 1e-9);
    assert!((sca_solve(&p, &settings, 0).unwrap().value - 1.0).abs() <= 1e-9);
}

#[test]
fn invalid_inputs_are_rejected() {
    let neg = diag(&[1.0, -1.0]);
    let id = diag(&[1.0, 1.0]);
    assert!(MaxMinRatioProblem::new(vec![neg.clone()], vec![id.clone()]).is_err());
    assert!(MaxMinRatioProblem::new(vec![id.clone()], vec![neg]).is_err());
    assert!(MaxMinRatioProblem::new(vec![id.clone()], vec![diag(&[1.0, 1.0, 1.0])]).is_err());
    assert!(MaxMinRatioProblem::new(vec![], vec![id]).is_err());
}

#[test]
fn sca_started_at_optimum_stays_there() {
    let settings = SolverSettings::default();
    for seed in 0..3 {
        let p = random_problem(100 + seed, 5, 2, true);
        let bis = solve_maxmin_ratio(&p, &settings).unwrap();
        let start = p.min_ratio(&bis.matrix);
        let sca = sca_solve_from(&p, &settings, &bis.matrix).unwrap();
        assert!(sca.value >= start - 1e-8 * start.abs().max(1.0));
        assert!(sca.iterations <= 2, "{} iterations from the optimum", sca.iterations);
        assert!(rel(sca.value, bis.value) <= 1e-6);
    }
}

#[test]
fn more_randomizations_never_hurt() {
    let settings = SolverSettings::default();
    for seed in 0..3 {
        let p = random_problem(200 + seed, 5, 3, false);
        let r = sca_solve(&p, &settings, 0).unwrap().matrix;
        let one = rank_one_extract(&r, &p, 1, seed);
        let many = rank_one_extract(&r, &p, 1000, seed);
        assert!(many.min_ratio >= one.min_ratio);
        assert!((many.vector.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn three_terms_agree_across_solvers() {
    let settings = SolverSettings::default();
    let p = random_problem(300, 5, 3, false);
    let sca = sca_solve(&p, &settings, 0).unwrap();
    let bis = solve_maxmin_ratio(&p, &settings);
    if let Ok(bis) = bis {
        assert!(rel(bis.value, sca.value) <= 1e-5, "{} vs {}", bis.value, sca.value);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let v = normalized(&random_vec(&mut rng, 5));
        assert!(p.min_ratio_vector(&v) <= sca.value * (1.0 + 1e-6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solvers_agree_and_bound_random_vectors(seed in 0u64..10_000, shared in any::<bool>()) {
        let p = random_problem(seed, 5, 2, shared);
        let settings = SolverSettings::default();
        let bis = solve_maxmin_ratio(&p, &settings).unwrap();
        let sca = sca_solve(&p, &settings, seed).unwrap();
        prop_assert!(rel(bis.value, sca.value) <= 1e-5, "bisection {} sca {}", bis.value, sca.value);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for _ in 0..50 {
            let v = normalized(&random_vec(&mut rng, 5));
            prop_assert!(p.min_ratio_vector(&v) <= bis.upper_bound * (1.0 + 1e-9));
        }
        let ext = rank_one_extract(&bis.matrix, &p, 50, seed);
        prop_assert!(ext.min_ratio <= bis.upper_bound * (1.0 + 1e-9));
    }

    #[test]
    fn value_scales_with_numerator_and_denominator(seed in 0u64..10_000, ca in 0.1f64..10.0, cb in 0.1f64..10.0) {
        let p = random_problem(seed, 4, 2, false);
        let settings = SolverSettings::default();
        let base = solve_maxmin_ratio(&p, &settings).unwrap();
        let scaled = solve_maxmin_ratio(&p.scaled(ca, cb), &settings).unwrap();
        prop_assert!(rel(scaled.value, base.value * ca / cb) <= 2e-6);
        let q = p.scaled(ca, cb);
        prop_assert!(rel(q.min_ratio(&base.matrix), scaled.value) <= 2e-6);
    }

    #[test]
    fn sca_objective_never_decreases(seed in 0u64..10_000, random_start in any::<bool>()) {
        let p = random_problem(seed, 5, 2, false);
        let settings = SolverSettings { sca_random_start: random_start, ..SolverSettings::default() };
        let sca = sca_solve(&p, &settings, seed).unwrap();
        for pair in sca.trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-8, "trace {:?}", sca.trace);
        }
        let r = &sca.matrix;
        prop_assert!((trace_product(r, &CMat::identity(5, 5)) - 1.0).abs() < 1e-9);
        prop_assert!(hermitian_eigen(r).bottom() >= -1e-9);
    }
}

#[test]
fn quad_form_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_psd(&mut rng, 3, 3);
    let v = normalized(&random_vec(&mut rng, 3));
    assert!((quad_form(&a, &v) - trace_product(&a, &outer(&v))).abs() < 1e-12);
}
