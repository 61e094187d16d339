//! Joint cross-validation over the two penalty grids.
//!
//! Folds are stratified by class and deterministic in the seed. For each
//! fold the interaction solver runs once per λ (warm-started down the
//! descending grid), and every λ_δ is evaluated against that Ω̂, so the full
//! λ x λ_δ surface costs little more than the λ path alone. Ties in mean
//! held-out error break toward larger λ, then larger λ_δ (the sparser
//! model); tie comparisons use exact integer arithmetic on error counts.

use rayon::prelude::*;

use crate::delta::{compute_gamma_hat, solve_delta};
use crate::error::{QudaError, Result};
use crate::intercept::{discriminant_raw, search_eta, ScoredSample};
use crate::moments::{estimate_moments, ClassLabel, ClassMoments, LabeledDataset};
use crate::omega::{AdmmConfig, OmegaSolver};
use crate::seed::derive_seed;

/// Cross-validation controls: explicit descending penalty grids plus the
/// fold count and fold-assignment seed.
#[derive(Clone, Debug)]
pub struct CvConfig {
    pub folds: usize,
    pub lambda_grid: Vec<f64>,
    pub lambda_delta_grid: Vec<f64>,
    pub seed: u64,
}

impl CvConfig {
    pub fn new(
        folds: usize,
        lambda_grid: Vec<f64>,
        lambda_delta_grid: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let cfg = CvConfig {
            folds,
            lambda_grid,
            lambda_delta_grid,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default grids: `points` log-spaced values per penalty, descending
    /// from the level that zeroes the estimate (`||Σ̂₁ - Σ̂₂||_max` for λ,
    /// `||γ̂||_max` at Ω̂ = 0, i.e. `4 ||Δμ̂||_max`, for λ_δ) down `decades`
    /// decades.
    pub fn with_default_grids(
        moments: &ClassMoments,
        folds: usize,
        seed: u64,
        points: usize,
        decades: f64,
    ) -> Result<Self> {
        let lambda_max = moments.sigma_diff().max_abs().max(1e-8);
        let gamma_max = moments
            .mu_diff()
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b.abs()))
            * 4.0;
        let lambda_delta_max = gamma_max.max(1e-8);
        CvConfig::new(
            folds,
            log_grid(lambda_max, points, decades),
            log_grid(lambda_delta_max, points, decades),
            seed,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(QudaError::InvalidConfig(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        for (name, grid) in [
            ("lambda_grid", &self.lambda_grid),
            ("lambda_delta_grid", &self.lambda_delta_grid),
        ] {
            if grid.is_empty() {
                return Err(QudaError::InvalidConfig(format!("{name} is empty")));
            }
            if grid.iter().any(|&v| !(v > 0.0)) {
                return Err(QudaError::InvalidConfig(format!(
                    "{name} must be strictly positive"
                )));
            }
            if grid.windows(2).any(|w| w[1] >= w[0]) {
                return Err(QudaError::InvalidConfig(format!(
                    "{name} must be strictly descending"
                )));
            }
        }
        Ok(())
    }
}

/// `points` log-spaced values from `top` down `decades` decades, descending.
pub fn log_grid(top: f64, points: usize, decades: f64) -> Vec<f64> {
    assert!(top > 0.0 && points >= 1 && decades > 0.0);
    if points == 1 {
        return vec![top];
    }
    (0..points)
        .map(|k| top * 10f64.powf(-decades * k as f64 / (points - 1) as f64))
        .collect()
}

/// Held-out error of one grid pair: per-fold `(errors, held_out_size)`.
#[derive(Clone, Debug)]
pub struct CvEntry {
    pub lambda: f64,
    pub lambda_delta: f64,
    pub fold_errors: Vec<(usize, usize)>,
    pub mean_mr: f64,
}

/// The full cross-validation surface plus the configuration that made it.
#[derive(Clone, Debug)]
pub struct CvTable {
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<CvEntry>,
}

impl CvTable {
    /// Writes the surface as CSV: one row per (lambda, lambda_delta) with
    /// per-fold counts and the mean rate.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["lambda".to_string(), "lambda_delta".to_string()];
        for f in 0..self.folds {
            header.push(format!("fold{f}_errors"));
            header.push(format!("fold{f}_held_out"));
        }
        header.push("mean_mr".to_string());
        wtr.write_record(&header).map_err(csv_err)?;
        for e in &self.entries {
            let mut rec = vec![e.lambda.to_string(), e.lambda_delta.to_string()];
            for &(errs, n) in &e.fold_errors {
                rec.push(errs.to_string());
                rec.push(n.to_string());
            }
            rec.push(e.mean_mr.to_string());
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> QudaError {
    QudaError::CorruptPayload(format!("csv: {e}"))
}

/// Deterministic stratified fold assignment: within each class, indices are
/// shuffled by a seeded stream and dealt round-robin, so class proportions
/// are preserved and every row lands in exactly one fold.
pub fn stratified_folds(labels: &[ClassLabel], folds: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut assignment = vec![0_usize; labels.len()];
    for class in [ClassLabel::One, ClassLabel::Two] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
            seed,
            "fold",
            u64::from(class.as_u8()),
        ));
        idx.shuffle(&mut rng);
        for (pos, &row) in idx.iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    assignment
}

/// Exact mean comparison of two entries sharing the same folds: compares
/// Σ_f e_f / n_f as integers over the common denominator Π_f n_f. Falls
/// back to floating point if the integer form overflows u128 (only
/// conceivable with millions of rows across many folds).
fn strictly_better(candidate: &[(usize, usize)], incumbent: &[(usize, usize)]) -> bool {
    let weighted = |counts: &[(usize, usize)]| -> Option<u128> {
        let mut total: u128 = 0;
        for (f, &(e, _)) in counts.iter().enumerate() {
            let mut w = e as u128;
            for (g, &(_, n)) in counts.iter().enumerate() {
                if g != f {
                    w = w.checked_mul(n as u128)?;
                }
            }
            total = total.checked_add(w)?;
        }
        Some(total)
    };
    match (weighted(candidate), weighted(incumbent)) {
        (Some(a), Some(b)) => a < b,
        _ => {
            let mean = |counts: &[(usize, usize)]| {
                counts.iter().map(|&(e, n)| e as f64 / n as f64).sum::<f64>()
            };
            mean(candidate) < mean(incumbent)
        }
    }
}

struct FoldOutcome {
    // errors[li][dj] over the held-out rows of this fold.
    errors: Vec<Vec<usize>>,
    held_out: usize,
}

/// Runs the joint grid search and returns the selected pair with the full
/// surface. Every fold refits the entire pipeline, including the intercept.
pub fn cv_select(
    data: &LabeledDataset,
    cfg: &CvConfig,
    admm: &AdmmConfig,
) -> Result<(f64, f64, CvTable)> {
    cfg.validate()?;
    admm.validate()?;
    for class in [ClassLabel::One, ClassLabel::Two] {
        let count = data.count(class);
        if count < cfg.folds {
            return Err(QudaError::TooFewPerClass {
                label: class.as_u8(),
                count,
                folds: cfg.folds,
            });
        }
    }
    let assignment = stratified_folds(data.labels(), cfg.folds, cfg.seed);

    let outcomes: Vec<Result<FoldOutcome>> = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| run_fold(data, &assignment, fold, cfg, admm))
        .collect();

    let mut per_fold = Vec::with_capacity(cfg.folds);
    for outcome in outcomes {
        per_fold.push(outcome?);
    }

    let mut entries = Vec::with_capacity(cfg.lambda_grid.len() * cfg.lambda_delta_grid.len());
    let mut best: Option<(usize, f64, f64)> = None; // (entry index, lambda, lambda_delta)
    for (li, &lambda) in cfg.lambda_grid.iter().enumerate() {
        for (dj, &lambda_delta) in cfg.lambda_delta_grid.iter().enumerate() {
            let fold_errors: Vec<(usize, usize)> = per_fold
                .iter()
                .map(|f| (f.errors[li][dj], f.held_out))
                .collect();
            let mean_mr = fold_errors
                .iter()
                .map(|&(e, n)| e as f64 / n as f64)
                .sum::<f64>()
                / cfg.folds as f64;
            entries.push(CvEntry {
                lambda,
                lambda_delta,
                fold_errors,
                mean_mr,
            });
            let idx = entries.len() - 1;
            match best {
                None => best = Some((idx, lambda, lambda_delta)),
                Some((bi, _, _)) => {
                    if strictly_better(&entries[idx].fold_errors, &entries[bi].fold_errors) {
                        best = Some((idx, lambda, lambda_delta));
                    }
                }
            }
        }
    }
    let (_, lambda_star, lambda_delta_star) = best.expect("grids are nonempty");
    Ok((
        lambda_star,
        lambda_delta_star,
        CvTable {
            folds: cfg.folds,
            seed: cfg.seed,
            entries,
        },
    ))
}

fn run_fold(
    data: &LabeledDataset,
    assignment: &[usize],
    fold: usize,
    cfg: &CvConfig,
    admm: &AdmmConfig,
) -> Result<FoldOutcome> {
    let train_rows: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] != fold).collect();
    let held_rows: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] == fold).collect();
    let train = data.subset(&train_rows)?;
    let moments = estimate_moments(&train)?;
    let solver = OmegaSolver::new(&moments, admm)?;
    let mu = moments.mu_mid();

    let mut errors = vec![vec![0usize; cfg.lambda_delta_grid.len()]; cfg.lambda_grid.len()];
    let mut warm = None;
    for (li, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let (omega_sol, state) = solver.solve_warm(lambda, warm.take())?;
        warm = Some(state);
        let gamma = compute_gamma_hat(&moments, &omega_sol.omega)?;

        // Quadratic score parts depend only on Ω̂; reuse across the λ_δ grid.
        let zero = vec![0.0; data.p()];
        let quad_train: Vec<f64> = train_rows
            .iter()
            .map(|&i| discriminant_raw(&mu, &omega_sol.omega, &zero, data.row(i)))
            .collect::<Result<_>>()?;
        let quad_held: Vec<f64> = held_rows
            .iter()
            .map(|&i| discriminant_raw(&mu, &omega_sol.omega, &zero, data.row(i)))
            .collect::<Result<_>>()?;

        for (dj, &lambda_delta) in cfg.lambda_delta_grid.iter().enumerate() {
            let delta_sol = solve_delta(&moments, &gamma, lambda_delta)?;
            let linear = |row: &[f64]| -> f64 {
                row.iter()
                    .zip(&mu)
                    .zip(&delta_sol.delta)
                    .map(|((z, m), d)| (z - m) * d)
                    .sum()
            };
            let scored: Vec<ScoredSample> = train_rows
                .iter()
                .zip(&quad_train)
                .map(|(&i, &q)| ScoredSample {
                    score: q + linear(data.row(i)),
                    label01: data.labels()[i].indicator_class1(),
                })
                .collect();
            let (eta, _) = search_eta(&scored)?;
            let mut errs = 0usize;
            for (&i, &q) in held_rows.iter().zip(&quad_held) {
                let pred1 = q + linear(data.row(i)) + eta > 0.0;
                if u8::from(pred1) != data.labels()[i].indicator_class1() {
                    errs += 1;
                }
            }
            errors[li][dj] = errs;
        }
    }
    Ok(FoldOutcome {
        errors,
        held_out: held_rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_dataset, SyntheticSpec};

    fn small_dataset() -> LabeledDataset {
        let (train, _) = make_dataset(&SyntheticSpec::new(3, 6, 25, 25, 11).unwrap()).unwrap();
        train
    }

    #[test]
    fn folds_partition_and_stratify() {
        let data = small_dataset();
        let assignment = stratified_folds(data.labels(), 5, 3);
        assert_eq!(assignment.len(), data.n());
        for fold in 0..5 {
            let c1 = (0..data.n())
                .filter(|&i| assignment[i] == fold && data.labels()[i] == ClassLabel::One)
                .count();
            assert_eq!(c1, 5, "25 class-1 rows over 5 folds");
        }
        assert_eq!(assignment, stratified_folds(data.labels(), 5, 3));
        assert_ne!(assignment, stratified_folds(data.labels(), 5, 4));
    }

    #[test]
    fn single_point_grids() {
        let data = small_dataset();
        let cfg = CvConfig::new(5, vec![0.5], vec![0.8], 1).unwrap();
        let (l, ld, table) = cv_select(&data, &cfg, &AdmmConfig::default()).unwrap();
        assert_eq!(l, 0.5);
        assert_eq!(ld, 0.8);
        assert_eq!(table.entries.len(), 1);
        assert_eq!(table.entries[0].fold_errors.len(), 5);
    }

    #[test]
    fn mean_mr_is_mean_of_fold_rates() {
        let data = small_dataset();
        let cfg = CvConfig::new(5, vec![0.4, 0.2], vec![0.9, 0.4], 1).unwrap();
        let (_, _, table) = cv_select(&data, &cfg, &AdmmConfig::default()).unwrap();
        for e in &table.entries {
            assert!(e.mean_mr >= 0.0 && e.mean_mr <= 1.0);
            let recomputed = e
                .fold_errors
                .iter()
                .map(|&(er, n)| er as f64 / n as f64)
                .sum::<f64>()
                / 5.0;
            assert_eq!(e.mean_mr, recomputed);
        }
    }

    #[test]
    fn tie_breaks_toward_sparser_pair() {
        // Identical consecutive grid values are forbidden; emulate a tie by
        // duplicating via two nearly-equal values that give identical fits
        // (huge lambdas produce zero estimates either way).
        let data = small_dataset();
        let big = 1e6;
        let cfg = CvConfig::new(5, vec![big, big * 0.999], vec![big, big * 0.999], 1).unwrap();
        let (l, ld, _) = cv_select(&data, &cfg, &AdmmConfig::default()).unwrap();
        assert_eq!(l, big);
        assert_eq!(ld, big);
    }

    #[test]
    fn rejects_too_few_per_class() {
        let (train, _) = make_dataset(&SyntheticSpec::new(3, 4, 3, 12, 2).unwrap()).unwrap();
        let cfg = CvConfig::new(5, vec![0.1], vec![0.1], 0).unwrap();
        assert!(matches!(
            cv_select(&train, &cfg, &AdmmConfig::default()),
            Err(QudaError::TooFewPerClass { label: 1, .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(CvConfig::new(1, vec![0.1], vec![0.1], 0).is_err());
        assert!(CvConfig::new(5, vec![], vec![0.1], 0).is_err());
        assert!(CvConfig::new(5, vec![0.1, 0.2], vec![0.1], 0).is_err());
        assert!(CvConfig::new(5, vec![0.1, -0.2], vec![0.1], 0).is_err());
        let g = log_grid(1.0, 8, 2.0);
        assert_eq!(g.len(), 8);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[7] - 0.01).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }
}
