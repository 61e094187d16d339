//! Intercept selection by in-sample error scan.
//!
//! Given the raw discriminant scores of the training rows, the in-sample
//! misclassification count as a function of the intercept is piecewise
//! constant, changing only when the threshold crosses a score. Sorting the
//! scores once and sweeping prefix sums over the n+1 gaps finds the exact
//! minimizer in O(n log n).

use crate::error::{shape_mismatch, QudaError, Result};
use crate::linalg::SymMatrix;

/// One training observation: its raw discriminant score and a 0/1 label
/// where 1 means class 1.
#[derive(Clone, Copy, Debug)]
pub struct ScoredSample {
    pub score: f64,
    pub label01: u8,
}

impl ScoredSample {
    pub fn new(score: f64, label01: u8) -> Result<Self> {
        if label01 > 1 {
            return Err(QudaError::InvalidLabel {
                found: label01.to_string(),
                row: 0,
            });
        }
        Ok(ScoredSample { score, label01 })
    }
}

/// Raw discriminant `(z - μ)ᵀ Ω (z - μ) + δᵀ (z - μ)` without the intercept.
pub fn discriminant_raw(mu: &[f64], omega: &SymMatrix, delta: &[f64], z: &[f64]) -> Result<f64> {
    let p = mu.len();
    if omega.dim() != p || delta.len() != p || z.len() != p {
        return Err(shape_mismatch(
            format!("dimension {p}"),
            format!(
                "omega {}, delta {}, z {}",
                omega.dim(),
                delta.len(),
                z.len()
            ),
        ));
    }
    let centered: Vec<f64> = z.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut quad = 0.0;
    for i in 0..p {
        let ci = centered[i];
        if ci == 0.0 {
            continue;
        }
        quad += ci * crate::linalg::dot(omega.row(i), &centered);
    }
    Ok(quad + crate::linalg::dot(delta, &centered))
}

/// Minimizes the in-sample error count over all intercepts.
///
/// Returns the chosen intercept and the attained error rate. Among split
/// points with equal error the one whose score gap is widest wins (maximum
/// margin), then the smallest index; the intercept is the midpoint of the
/// winning open interval, or the boundary score offset by one on the two
/// half-lines. Tied scores produce zero-width intervals, which are skipped.
pub fn search_eta(samples: &[ScoredSample]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(QudaError::EmptyInput);
    }
    if samples.iter().any(|s| !s.score.is_finite()) {
        return Err(QudaError::NonFinite { what: "scores" });
    }
    let n = samples.len();
    let mut sorted: Vec<ScoredSample> = samples.to_vec();
    sorted.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .expect("scores are finite")
            .then(a.label01.cmp(&b.label01))
    });

    // prefix_ones[k] = number of class-1 samples among the first k.
    let mut prefix_ones = vec![0_usize; n + 1];
    for (i, s) in sorted.iter().enumerate() {
        prefix_ones[i + 1] = prefix_ones[i] + usize::from(s.label01);
    }
    let total_ones = prefix_ones[n];

    // Splitting at k predicts class 2 for the k lowest scores:
    // errors(k) = class-1 samples below the split + class-2 samples above it.
    let errors_at = |k: usize| prefix_ones[k] + (n - k) - (total_ones - prefix_ones[k]);

    let mut best_k = None;
    let mut best_errors = usize::MAX;
    let mut best_width = f64::NEG_INFINITY;
    for k in 0..=n {
        let width = if k == 0 || k == n {
            f64::INFINITY
        } else {
            sorted[k].score - sorted[k - 1].score
        };
        if width <= 0.0 {
            continue;
        }
        let e = errors_at(k);
        if e < best_errors || (e == best_errors && width > best_width) {
            best_errors = e;
            best_width = width;
            best_k = Some(k);
        }
    }
    let k = best_k.expect("k = 0 is always a candidate");

    let eta = if k == 0 {
        -sorted[0].score + 1.0
    } else if k == n {
        -sorted[n - 1].score - 1.0
    } else {
        -0.5 * (sorted[k - 1].score + sorted[k].score)
    };
    Ok((eta, best_errors as f64 / n as f64))
}
