//! Independent oracles shared by the integration and acceptance tests.
//!
//! Everything here deliberately avoids the library's solver paths: linear
//! systems are solved by Gaussian elimination with partial pivoting, the
//! lasso oracle enumerates sign patterns, and the intercept oracle scans
//! candidate thresholds directly.

#![allow(dead_code)]

use quda::{ClassMoments, Mat, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        assert!(m[pivot][col].abs() > 1e-14, "singular system in test oracle");
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

/// Column-major vectorization, the convention under which
/// `vec(S1 X S2) = (S2 ⊗ S1) vec(X)` for symmetric S2.
pub fn vec_colmajor(m: &Mat) -> Vec<f64> {
    let p = m.nrows();
    let mut v = Vec::with_capacity(p * p);
    for j in 0..p {
        for i in 0..p {
            v.push(m.get(i, j));
        }
    }
    v
}

pub fn unvec_colmajor(v: &[f64], p: usize) -> Mat {
    let mut m = Mat::zeros(p, p);
    for j in 0..p {
        for i in 0..p {
            m.set(i, j, v[j * p + i]);
        }
    }
    m
}

/// Dense `(S2 ⊗ S1 + rho I)` indexed by vertex pairs under column-major vec.
pub fn kron_plus_ridge(s1: &Mat, s2: &Mat, rho: f64) -> Vec<Vec<f64>> {
    let p = s1.nrows();
    let n = p * p;
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..p {
        for i in 0..p {
            let r = j * p + i;
            for l in 0..p {
                for k in 0..p {
                    let c = l * p + k;
                    out[r][c] = s2.get(j, l) * s1.get(i, k);
                }
            }
            out[r][r] += rho;
        }
    }
    out
}

/// Solves `(S2 ⊗ S1 + rho I) vec(X) = vec(A)` densely.
pub fn dense_omega_solve(s1: &Mat, s2: &Mat, rho: f64, a: &Mat) -> Mat {
    let system = kron_plus_ridge(s1, s2, rho);
    let x = lu_solve(&system, &vec_colmajor(a));
    unvec_colmajor(&x, s1.nrows())
}

/// Brute-force lasso solution of
/// `min 0.5 xᵀ A x - gᵀ x + lambda |x|₁`
/// by enumerating all 3^p sign patterns and keeping the KKT-consistent one.
pub fn lasso_sign_pattern_oracle(a: &Mat, g: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let p = g.len();
    assert!(p <= 8, "pattern enumeration is exponential in p");
    let mut pattern = vec![-1_i8; p];
    let mut best: Option<Vec<f64>> = None;
    loop {
        if let Some(x) = try_pattern(a, g, lambda, &pattern) {
            best = Some(x);
        }
        // Next pattern in base-3.
        let mut idx = 0;
        loop {
            if idx == p {
                return best;
            }
            pattern[idx] += 1;
            if pattern[idx] <= 1 {
                break;
            }
            pattern[idx] = -1;
            idx += 1;
        }
    }
}

fn try_pattern(a: &Mat, g: &[f64], lambda: f64, pattern: &[i8]) -> Option<Vec<f64>> {
    let p = g.len();
    let free: Vec<usize> = (0..p).filter(|&j| pattern[j] != 0).collect();
    let mut x = vec![0.0; p];
    if !free.is_empty() {
        let sub: Vec<Vec<f64>> = free
            .iter()
            .map(|&r| free.iter().map(|&c| a.get(r, c)).collect())
            .collect();
        let rhs: Vec<f64> = free
            .iter()
            .map(|&r| g[r] - lambda * f64::from(pattern[r]))
            .collect();
        let sol = lu_solve(&sub, &rhs);
        for (idx, &j) in free.iter().enumerate() {
            // The restricted solution must land strictly on its assumed side.
            if sol[idx] * f64::from(pattern[j]) <= 0.0 {
                return None;
            }
            x[j] = sol[idx];
        }
    }
    // Subgradient bound off the support.
    let ax: Vec<f64> = (0..p)
        .map(|r| (0..p).map(|c| a.get(r, c) * x[c]).sum())
        .collect();
    for j in 0..p {
        if pattern[j] == 0 && (g[j] - ax[j]).abs() > lambda + 1e-9 {
            return None;
        }
    }
    Some(x)
}

/// Minimal in-sample error count over every possible intercept, by direct
/// scan of the candidate thresholds.
pub fn eta_scan_min_errors(samples: &[(f64, u8)]) -> usize {
    let mut scores: Vec<f64> = samples.iter().map(|&(s, _)| s).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scores.dedup();
    let mut candidates = vec![scores[0] - 1.0, scores[scores.len() - 1] + 1.0];
    for w in scores.windows(2) {
        candidates.push(0.5 * (w[0] + w[1]));
    }
    // Threshold t predicts class 1 when score > t (i.e. eta = -t).
    candidates
        .iter()
        .map(|&t| {
            samples
                .iter()
                .filter(|&&(s, l)| u8::from(s > t) != l)
                .count()
        })
        .min()
        .expect("candidates nonempty")
}

/// Random well-conditioned SPD matrix with eigenvalues bounded away from 0.
pub fn random_spd(p: usize, ridge: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    let f = Mat::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let g = f.transposed().matmul(&f).scale(1.0 / p as f64);
    let mut m = g.add(&Mat::identity(p).scale(ridge));
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    SymMatrix::new(m).unwrap()
}

/// Class moments with random SPD covariances and random means.
pub fn random_moments(p: usize, rng: &mut ChaCha8Rng) -> ClassMoments {
    ClassMoments {
        mu1: (0..p).map(|_| rng.random_range(-1.0..1.0)).collect(),
        mu2: (0..p).map(|_| rng.random_range(-1.0..1.0)).collect(),
        sigma1: random_spd(p, 0.6, rng),
        sigma2: random_spd(p, 0.6, rng),
        n1: 100,
        n2: 100,
    }
}
