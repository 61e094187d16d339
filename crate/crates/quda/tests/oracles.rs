//! Solver outputs checked against brute-force oracles that take an
//! independent computational route.

mod common;

use common::*;
use quda::{
    compute_gamma_hat, kkt_residual_omega, omega_update, search_eta, solve_delta, solve_omega,
    sym_eigen, AdmmConfig, Mat, OmegaSolver, ScoredSample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn omega_update_matches_dense_kronecker_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..10 {
        let p = 4;
        let s1 = random_spd(p, 0.4, &mut rng);
        let s2 = random_spd(p, 0.4, &mut rng);
        let rho = 0.5 + 0.2 * trial as f64;
        let a = Mat::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let eig1 = sym_eigen(&s1).unwrap();
        let eig2 = sym_eigen(&s2).unwrap();
        let b = quda::build_b_matrix(&eig1.values, &eig2.values, rho).unwrap();
        let fast = omega_update(&a, &eig1, &eig2, &b).unwrap();
        let oracle = dense_omega_solve(s1.as_mat(), s2.as_mat(), rho, &a);
        let rel = fast.sub(&oracle).max_abs() / (1.0 + oracle.max_abs());
        assert!(rel < 1e-8, "trial {trial}: relative error {rel}");
    }
}

#[test]
fn admm_lambda_zero_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let cfg = AdmmConfig {
        tol_abs: 1e-9,
        tol_rel: 1e-9,
        max_iter: 20_000,
        ..AdmmConfig::default()
    };
    for p in [3, 4, 5] {
        let mut m = random_moments(p, &mut rng);
        m.mu1 = vec![0.0; p];
        m.mu2 = vec![0.0; p];
        let sol = solve_omega(&m, 0.0, &cfg).unwrap();
        // lambda = 0: the minimizer solves (S2 x S1) vec(X) = vec(S1 - S2).
        let target = m.sigma_diff();
        let oracle = dense_omega_solve(m.sigma1.as_mat(), m.sigma2.as_mat(), 0.0, &target);
        let err = sol.omega.as_mat().sub(&oracle).max_abs();
        assert!(err < 1e-5, "p={p}: max error {err}");
    }
}

#[test]
fn admm_kkt_certificate_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let cfg = AdmmConfig {
        tol_abs: 1e-7,
        tol_rel: 1e-7,
        max_iter: 10_000,
        ..AdmmConfig::default()
    };
    let p = 10;
    let m = random_moments(p, &mut rng);
    let solver = OmegaSolver::new(&m, &cfg).unwrap();
    for lambda in [0.01, 0.1, 0.5] {
        let sol = solver.solve(lambda).unwrap();
        let res = kkt_residual_omega(&sol.omega_raw, &m, lambda).unwrap();
        assert!(
            res <= 1e-3 * lambda.max(1.0),
            "lambda={lambda}: kkt residual {res}"
        );
    }
}

#[test]
fn lasso_matches_sign_pattern_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let p = 4;
    for trial in 0..10 {
        let m = random_moments(p, &mut rng);
        let gamma: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lambda = 0.3;
        let sol = solve_delta(&m, &gamma, lambda).unwrap();
        let a = m.sigma_sum();
        let oracle = lasso_sign_pattern_oracle(&a, &gamma, lambda)
            .expect("some sign pattern must be consistent");
        for j in 0..p {
            assert!(
                (sol.delta[j] - oracle[j]).abs() < 1e-6,
                "trial {trial} coordinate {j}: {} vs {}",
                sol.delta[j],
                oracle[j]
            );
        }
    }
}

#[test]
fn eta_search_matches_threshold_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..10 {
        let n = 50;
        let raw: Vec<(f64, u8)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(-3.0..3.0),
                    u8::from(rng.random_range(0.0..1.0) > 0.5),
                )
            })
            .collect();
        let samples: Vec<ScoredSample> = raw
            .iter()
            .map(|&(s, l)| ScoredSample::new(s, l).unwrap())
            .collect();
        let (_, err) = search_eta(&samples).unwrap();
        let count = (err * n as f64).round() as usize;
        assert_eq!(count, eta_scan_min_errors(&raw));
    }
}

#[test]
fn gamma_hat_feeds_kkt_consistent_delta() {
    // End-to-end delta pipeline sanity on random moments: the fitted delta
    // satisfies the box condition |A d - gamma| <= lambda everywhere.
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let p = 6;
    let m = random_moments(p, &mut rng);
    let cfg = AdmmConfig::default();
    let omega = solve_omega(&m, 0.1, &cfg).unwrap().omega;
    let gamma = compute_gamma_hat(&m, &omega).unwrap();
    let lambda = 0.2;
    let sol = solve_delta(&m, &gamma, lambda).unwrap();
    let a = m.sigma_sum();
    let ad = a.matvec(&sol.delta).unwrap();
    for j in 0..p {
        assert!((ad[j] - gamma[j]).abs() <= lambda + 1e-6);
    }
}
