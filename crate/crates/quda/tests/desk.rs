//! Desk-scale statistical checks against an exhaustive tuning reference and
//! the known Bayes error of the benchmark models.

use quda::seed::derive_seed;
use quda::{
    build_truth, compute_gamma_hat, estimate_moments, oracle_misclassification_rate,
    sample_labeled, search_eta, solve_delta, AdmmConfig, ClassLabel, CvConfig, CvGridSpec,
    OmegaSolver, OracleClassifier, ScoredSample, SyntheticSpec,
};

/// Cross-validated penalties land within 3 points of test MR of the best
/// grid pair chosen with full knowledge of a large independent test set.
#[test]
fn cv_selection_close_to_exhaustive_grid_reference() {
    let spec = SyntheticSpec::new(2, 50, 100, 100, 2024).unwrap();
    let truth = build_truth(&spec).unwrap();
    let train = sample_labeled(&truth, 100, 100, derive_seed(2024, "train", 0)).unwrap();
    let test = sample_labeled(&truth, 2000, 2000, derive_seed(2024, "test", 0)).unwrap();

    let admm = AdmmConfig::default();
    let moments = estimate_moments(&train).unwrap();
    let cv = CvConfig::with_default_grids(&moments, 5, derive_seed(2024, "cv", 0), 8, 2.0).unwrap();
    let (lambda_star, lambda_delta_star, _) = quda::cv_select(&train, &cv, &admm).unwrap();

    // Exhaustive reference: every grid pair fitted on the full training set
    // and scored on the test set.
    let solver = OmegaSolver::new(&moments, &admm).unwrap();
    let mu = moments.mu_mid();
    let quad = |omega: &quda::SymMatrix, rows: &quda::LabeledDataset| -> Vec<f64> {
        (0..rows.n())
            .map(|i| {
                quda::discriminant_raw(&mu, omega, &vec![0.0; 50], rows.row(i)).unwrap()
            })
            .collect()
    };
    let mut best_mr = f64::INFINITY;
    let mut selected_mr = None;
    let mut warm = None;
    for &lambda in &cv.lambda_grid {
        let (omega_sol, state) = solver.solve_warm(lambda, warm.take()).unwrap();
        warm = Some(state);
        let gamma = compute_gamma_hat(&moments, &omega_sol.omega).unwrap();
        let quad_train = quad(&omega_sol.omega, &train);
        let quad_test = quad(&omega_sol.omega, &test);
        for &lambda_delta in &cv.lambda_delta_grid {
            let delta_sol = solve_delta(&moments, &gamma, lambda_delta).unwrap();
            let linear = |row: &[f64]| -> f64 {
                row.iter()
                    .zip(&mu)
                    .zip(&delta_sol.delta)
                    .map(|((z, m), d)| (z - m) * d)
                    .sum()
            };
            let scored: Vec<ScoredSample> = (0..train.n())
                .map(|i| ScoredSample {
                    score: quad_train[i] + linear(train.row(i)),
                    label01: train.labels()[i].indicator_class1(),
                })
                .collect();
            let (eta, _) = search_eta(&scored).unwrap();
            let errors = (0..test.n())
                .filter(|&i| {
                    let pred1 = quad_test[i] + linear(test.row(i)) + eta > 0.0;
                    u8::from(pred1) != test.labels()[i].indicator_class1()
                })
                .count();
            let mr = errors as f64 / test.n() as f64;
            best_mr = best_mr.min(mr);
            if lambda == lambda_star && lambda_delta == lambda_delta_star {
                selected_mr = Some(mr);
            }
        }
    }
    let selected_mr = selected_mr.expect("selected pair lies on the grid");
    assert!(
        selected_mr <= best_mr + 0.03,
        "cv-selected MR {selected_mr:.4} vs oracle-tuned {best_mr:.4}"
    );
    // The oracle-tuned fit reaches the low single digits on this model.
    assert!(best_mr <= 0.04, "oracle-tuned MR {best_mr:.4}");
}

/// Bayes error of the decaying-precision model at p=50 on 10^4 points.
#[test]
fn oracle_error_on_model2_matches_reported_level() {
    let truth = build_truth(&SyntheticSpec::new(2, 50, 100, 100, 31).unwrap()).unwrap();
    let oracle = OracleClassifier::new(&truth).unwrap();
    let test = sample_labeled(&truth, 5000, 5000, derive_seed(31, "oracle-test", 0)).unwrap();
    let mr = oracle_misclassification_rate(&oracle, &test).unwrap();
    assert!(
        (0.0035..=0.0095).contains(&mr),
        "oracle MR {mr:.4} outside 0.0065 +/- 0.003"
    );
}

/// With equal class covariances, cross-validation prefers penalties that
/// empty the interaction support in most replications.
#[test]
fn model3_cv_usually_selects_empty_interaction_support() {
    let spec = SyntheticSpec::new(3, 50, 100, 100, 0x5EED_0006).unwrap();
    let summary = quda::run_benchmark(
        &spec,
        6,
        100,
        &CvGridSpec::default(),
        &AdmmConfig::default(),
    )
    .unwrap();
    let empty = summary
        .per_rep
        .iter()
        .filter(|r| r.support.fp_inter == 0)
        .count();
    assert!(empty >= 4, "only {empty}/6 replications had empty support");
    // No interactions exist, so nothing can be missed.
    assert!(summary.per_rep.iter().all(|r| r.support.fn_inter == 0));
}

/// Fold counts are preserved with unequal class sizes too.
#[test]
fn stratified_folds_with_unequal_classes() {
    let labels: Vec<ClassLabel> = (0..37)
        .map(|i| {
            if i < 22 {
                ClassLabel::One
            } else {
                ClassLabel::Two
            }
        })
        .collect();
    let assignment = quda::stratified_folds(&labels, 5, 9);
    for fold in 0..5 {
        let ones = labels
            .iter()
            .zip(&assignment)
            .filter(|(&l, &f)| l == ClassLabel::One && f == fold)
            .count();
        assert!((4..=5).contains(&ones));
    }
}
