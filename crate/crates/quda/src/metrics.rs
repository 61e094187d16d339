//! Evaluation metrics and the replication benchmark harness.
//!
//! Support errors for the interaction matrix are counted over unique entries
//! (upper triangle including the diagonal); symmetric constructions would
//! otherwise double-count off-diagonal hits. Linear-index errors are counted
//! per coordinate. True supports use the zero threshold in
//! [`crate::constants::TRUTH_SUPPORT_TOL`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QudaError, Result};
use crate::model::{fit, OracleClassifier, QudaModel, SyntheticTruth};
use crate::moments::{estimate_moments, LabeledDataset};
use crate::omega::AdmmConfig;
use crate::seed::derive_seed;
use crate::synth::{build_truth, sample_labeled, SyntheticSpec};
use crate::tuning::{cv_select, CvConfig};

/// Fraction of test rows the model labels incorrectly.
pub fn misclassification_rate(model: &QudaModel, test: &LabeledDataset) -> Result<f64> {
    if test.n() == 0 {
        return Err(QudaError::EmptyInput);
    }
    let mut errors = 0usize;
    for i in 0..test.n() {
        if model.classify(test.row(i))? != test.labels()[i] {
            errors += 1;
        }
    }
    Ok(errors as f64 / test.n() as f64)
}

/// Same rate under the Bayes rule of a known truth.
pub fn oracle_misclassification_rate(
    oracle: &OracleClassifier,
    test: &LabeledDataset,
) -> Result<f64> {
    if test.n() == 0 {
        return Err(QudaError::EmptyInput);
    }
    let mut errors = 0usize;
    for i in 0..test.n() {
        if oracle.classify(test.row(i))? != test.labels()[i] {
            errors += 1;
        }
    }
    Ok(errors as f64 / test.n() as f64)
}

/// False/negative counts for interactions (unique entries) and main effects
/// (coordinates).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportCounts {
    pub fp_inter: usize,
    pub fn_inter: usize,
    pub fp_main: usize,
    pub fn_main: usize,
}

/// Compares estimated supports against the truth.
pub fn support_metrics(
    omega_support: &[(usize, usize)],
    delta_support: &[usize],
    truth: &SyntheticTruth,
) -> Result<SupportCounts> {
    let p = truth.p();
    for &(i, j) in omega_support {
        if i > j || j >= p {
            return Err(crate::error::shape_mismatch(
                format!("upper-triangle pairs below {p}"),
                format!("({i},{j})"),
            ));
        }
    }
    if delta_support.iter().any(|&i| i >= p) {
        return Err(crate::error::shape_mismatch(
            format!("coordinates below {p}"),
            "out-of-range delta support".to_string(),
        ));
    }
    let true_inter: std::collections::BTreeSet<(usize, usize)> =
        truth.omega_support().into_iter().collect();
    let true_main: std::collections::BTreeSet<usize> =
        truth.delta_support().into_iter().collect();
    let est_inter: std::collections::BTreeSet<(usize, usize)> =
        omega_support.iter().copied().collect();
    let est_main: std::collections::BTreeSet<usize> = delta_support.iter().copied().collect();

    Ok(SupportCounts {
        fp_inter: est_inter.difference(&true_inter).count(),
        fn_inter: true_inter.difference(&est_inter).count(),
        fp_main: est_main.difference(&true_main).count(),
        fn_main: true_main.difference(&est_main).count(),
    })
}

/// One replication's outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepReport {
    pub rep: usize,
    pub seed: u64,
    pub lambda: f64,
    pub lambda_delta: f64,
    pub mr: f64,
    pub oracle_mr: f64,
    #[serde(flatten)]
    pub support: SupportCounts,
}

/// Mean and standard error of one metric across replications.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub se: f64,
}

/// Sample mean and standard error (sd/sqrt(reps), n-1 divisor).
pub fn aggregate(values: &[f64]) -> Aggregate {
    let n = values.len();
    assert!(n >= 2, "aggregation needs at least two replications");
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Aggregate {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Aggregated benchmark outcome for one model configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchSummary {
    pub model_id: u8,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
    pub reps: usize,
    pub test_size: usize,
    pub mr: Aggregate,
    pub oracle_mr: Aggregate,
    pub fp_main: Aggregate,
    pub fp_inter: Aggregate,
    pub fn_main: Aggregate,
    pub fn_inter: Aggregate,
    pub per_rep: Vec<RepReport>,
}

/// Shape of the per-replication cross-validation (grids are rebuilt from
/// each replication's own training moments).
#[derive(Clone, Copy, Debug)]
pub struct CvGridSpec {
    pub folds: usize,
    pub grid_points: usize,
    pub decades: f64,
}

impl Default for CvGridSpec {
    fn default() -> Self {
        CvGridSpec {
            folds: 5,
            grid_points: 8,
            decades: 2.0,
        }
    }
}

/// Runs `reps` replications of simulate -> cross-validate -> fit -> test.
///
/// Per-replication seeds derive from the master seed in `spec.seed`;
/// replications execute in a work pool and are reduced in index order, so
/// the result is independent of scheduling. Any failing replication aborts
/// the whole run with its index attached.
pub fn run_benchmark(
    spec: &SyntheticSpec,
    reps: usize,
    test_size: usize,
    grid: &CvGridSpec,
    admm: &AdmmConfig,
) -> Result<BenchSummary> {
    if reps < 2 {
        return Err(QudaError::InvalidConfig(format!(
            "need at least 2 replications for a standard error, got {reps}"
        )));
    }
    if test_size == 0 {
        return Err(QudaError::EmptyInput);
    }
    let outcomes: Vec<Result<RepReport>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            run_replication(spec, rep, test_size, grid, admm).map_err(|e| {
                QudaError::Replication {
                    rep,
                    source: Box::new(e),
                }
            })
        })
        .collect();
    let mut per_rep = Vec::with_capacity(reps);
    for outcome in outcomes {
        per_rep.push(outcome?);
    }

    let col = |f: fn(&RepReport) -> f64| -> Vec<f64> { per_rep.iter().map(f).collect() };
    Ok(BenchSummary {
        model_id: spec.model_id,
        p: spec.p,
        n1: spec.n1,
        n2: spec.n2,
        reps,
        test_size,
        mr: aggregate(&col(|r| r.mr)),
        oracle_mr: aggregate(&col(|r| r.oracle_mr)),
        fp_main: aggregate(&col(|r| r.support.fp_main as f64)),
        fp_inter: aggregate(&col(|r| r.support.fp_inter as f64)),
        fn_main: aggregate(&col(|r| r.support.fn_main as f64)),
        fn_inter: aggregate(&col(|r| r.support.fn_inter as f64)),
        per_rep,
    })
}

fn run_replication(
    spec: &SyntheticSpec,
    rep: usize,
    test_size: usize,
    grid: &CvGridSpec,
    admm: &AdmmConfig,
) -> Result<RepReport> {
    let rep_seed = derive_seed(spec.seed, "rep", rep as u64);
    let rep_spec = SyntheticSpec {
        seed: rep_seed,
        ..*spec
    };
    let truth = build_truth(&rep_spec)?;
    let train = sample_labeled(&truth, spec.n1, spec.n2, derive_seed(rep_seed, "train", 0))?;

    let moments = estimate_moments(&train)?;
    let cv = CvConfig::with_default_grids(
        &moments,
        grid.folds,
        derive_seed(rep_seed, "cv", 0),
        grid.grid_points,
        grid.decades,
    )?;
    let (lambda, lambda_delta, _) = cv_select(&train, &cv, admm)?;
    let model = fit(&train, lambda, lambda_delta, admm)?;

    let test = sample_labeled(&truth, test_size, test_size, derive_seed(rep_seed, "test", 0))?;
    let mr = misclassification_rate(&model, &test)?;
    let oracle = OracleClassifier::new(&truth)?;
    let oracle_mr = oracle_misclassification_rate(&oracle, &test)?;
    let support = support_metrics(
        &model.metadata.omega_support,
        &model.metadata.delta_support,
        &truth,
    )?;

    Ok(RepReport {
        rep,
        seed: rep_seed,
        lambda,
        lambda_delta,
        mr,
        oracle_mr,
        support,
    })
}

/// Formats summaries as a Markdown table with the usual benchmark columns.
pub fn format_table(summaries: &[BenchSummary]) -> String {
    let mut out = String::new();
    out.push_str(
        "| model | p | method | MR (%) | FP.main | FP.inter | FN.main | FN.inter |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for s in summaries {
        out.push_str(&format!(
            "| {} | {} | QUDA | {:.2} ({:.2}) | {:.2} ({:.2}) | {:.2} ({:.2}) | {:.2} ({:.2}) | {:.2} ({:.2}) |\n",
            s.model_id,
            s.p,
            100.0 * s.mr.mean,
            100.0 * s.mr.se,
            s.fp_main.mean,
            s.fp_main.se,
            s.fp_inter.mean,
            s.fp_inter.se,
            s.fn_main.mean,
            s.fn_main.se,
            s.fn_inter.mean,
            s.fn_inter.se,
        ));
        out.push_str(&format!(
            "| {} | {} | Oracle | {:.2} ({:.2}) | -- | -- | -- | -- |\n",
            s.model_id,
            s.p,
            100.0 * s.oracle_mr.mean,
            100.0 * s.oracle_mr.se,
        ));
    }
    out
}

/// Writes the per-replication log as CSV (full float precision).
pub fn write_rep_log<W: std::io::Write>(summaries: &[BenchSummary], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "model_id",
        "p",
        "rep",
        "seed",
        "lambda",
        "lambda_delta",
        "mr",
        "oracle_mr",
        "fp_main",
        "fp_inter",
        "fn_main",
        "fn_inter",
    ])
    .map_err(|e| QudaError::CorruptPayload(format!("csv: {e}")))?;
    for s in summaries {
        for r in &s.per_rep {
            wtr.write_record([
                s.model_id.to_string(),
                s.p.to_string(),
                r.rep.to_string(),
                r.seed.to_string(),
                r.lambda.to_string(),
                r.lambda_delta.to_string(),
                r.mr.to_string(),
                r.oracle_mr.to_string(),
                r.support.fp_main.to_string(),
                r.support.fp_inter.to_string(),
                r.support.fn_main.to_string(),
                r.support.fn_inter.to_string(),
            ])
            .map_err(|e| QudaError::CorruptPayload(format!("csv: {e}")))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::model::{FitMetadata, QudaModel};
    use crate::moments::ClassLabel;
    use crate::synth::make_dataset;

    fn constant_class2_model(p: usize) -> QudaModel {
        QudaModel {
            mu: vec![0.0; p],
            omega: SymMatrix::zeros(p),
            delta: vec![0.0; p],
            eta: -1.0,
            metadata: FitMetadata {
                lambda: 0.0,
                lambda_delta: 0.0,
                rho: 1.0,
                admm_iterations: 0,
                admm_primal_residual: 0.0,
                admm_dual_residual: 0.0,
                cd_sweeps: 0,
                cd_kkt_residual: 0.0,
                insample_error: 0.0,
                omega_support: vec![],
                delta_support: vec![],
            },
        }
    }

    fn dataset_all(label: ClassLabel, n: usize, p: usize) -> LabeledDataset {
        // LabeledDataset requires both classes; build with 2 extra rows of
        // the other class, then subset... instead test via mixed sets.
        let mut labels = vec![label; n];
        let other = match label {
            ClassLabel::One => ClassLabel::Two,
            ClassLabel::Two => ClassLabel::One,
        };
        labels.extend([other, other]);
        let x = crate::linalg::Mat::zeros(n + 2, p);
        LabeledDataset::new(x, labels).unwrap()
    }

    #[test]
    fn mr_trivial_cases() {
        let model = constant_class2_model(2);
        // All-class-2 block of a mixed set: errors only on the class-1 rows.
        let d = dataset_all(ClassLabel::Two, 8, 2);
        let mr = misclassification_rate(&model, &d).unwrap();
        assert!((mr - 2.0 / 10.0).abs() < 1e-15);
        let d = dataset_all(ClassLabel::One, 8, 2);
        let mr = misclassification_rate(&model, &d).unwrap();
        assert!((mr - 8.0 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn support_counts_cases() {
        let truth = build_truth(&SyntheticSpec::new(1, 50, 100, 100, 0).unwrap()).unwrap();
        let exact = truth.omega_support();
        let delta_truth = truth.delta_support();
        let c = support_metrics(&exact, &delta_truth, &truth).unwrap();
        assert_eq!(c, SupportCounts::default());

        // Empty interaction estimate misses all 6 unique entries.
        let c = support_metrics(&[], &delta_truth, &truth).unwrap();
        assert_eq!(c.fn_inter, 6);
        assert_eq!(c.fp_inter, 0);

        // Model 3: true interaction support empty -> any estimate is FP, FN = 0.
        let truth3 = build_truth(&SyntheticSpec::new(3, 10, 100, 100, 0).unwrap()).unwrap();
        let c = support_metrics(&[(0, 1), (2, 2)], &[0, 1], &truth3).unwrap();
        assert_eq!(c.fp_inter, 2);
        assert_eq!(c.fn_inter, 0);
    }

    #[test]
    fn aggregate_mean_se() {
        let a = aggregate(&[1.0, 3.0]);
        assert!((a.mean - 2.0).abs() < 1e-15);
        // sd = sqrt(2), se = sqrt(2)/sqrt(2) = 1.
        assert!((a.se - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benchmark_is_deterministic_and_oracle_bounded() {
        let spec = SyntheticSpec::new(3, 8, 30, 30, 77).unwrap();
        let grid = CvGridSpec {
            folds: 3,
            grid_points: 3,
            decades: 1.0,
        };
        let a = run_benchmark(&spec, 2, 200, &grid, &AdmmConfig::default()).unwrap();
        let b = run_benchmark(&spec, 2, 200, &grid, &AdmmConfig::default()).unwrap();
        assert_eq!(a.mr.mean, b.mr.mean);
        assert_eq!(a.per_rep[0].lambda, b.per_rep[0].lambda);
        assert_eq!(a.per_rep[1].mr, b.per_rep[1].mr);
        // Bayes rule is optimal up to sampling noise on the shared test set.
        for r in &a.per_rep {
            let se = (r.mr * (1.0 - r.mr) / 400.0).sqrt();
            assert!(r.oracle_mr <= r.mr + 3.0 * se.max(0.02));
        }
        assert!(run_benchmark(&spec, 1, 100, &grid, &AdmmConfig::default()).is_err());
    }

    #[test]
    fn rep_log_roundtrip_matches_aggregates() {
        let spec = SyntheticSpec::new(3, 6, 20, 20, 5).unwrap();
        let grid = CvGridSpec {
            folds: 2,
            grid_points: 2,
            decades: 1.0,
        };
        let summary = run_benchmark(&spec, 3, 50, &grid, &AdmmConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_rep_log(std::slice::from_ref(&summary), &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        let mut mrs = Vec::new();
        for rec in rdr.records() {
            let rec = rec.unwrap();
            mrs.push(rec[6].parse::<f64>().unwrap());
        }
        let re_agg = aggregate(&mrs);
        assert_eq!(re_agg.mean, summary.mr.mean);
        assert_eq!(re_agg.se, summary.mr.se);
    }

    #[test]
    fn failed_replication_aborts_with_its_index() {
        let spec = SyntheticSpec::new(2, 6, 20, 20, 9).unwrap();
        let grid = CvGridSpec {
            folds: 2,
            grid_points: 2,
            decades: 1.0,
        };
        let hopeless = AdmmConfig {
            max_iter: 1,
            tol_abs: 1e-300,
            tol_rel: 1e-300,
            ..AdmmConfig::default()
        };
        match run_benchmark(&spec, 3, 50, &grid, &hopeless) {
            Err(crate::QudaError::Replication { .. }) => {}
            other => panic!("expected a replication-tagged abort, got {other:?}"),
        }
    }

    #[test]
    fn make_dataset_used_by_benchmark_is_fresh_per_rep() {
        let spec = SyntheticSpec::new(2, 5, 20, 20, 1).unwrap();
        let (d1, _) = make_dataset(&SyntheticSpec { seed: derive_seed(1, "rep", 0), ..spec }).unwrap();
        let (d2, _) = make_dataset(&SyntheticSpec { seed: derive_seed(1, "rep", 1), ..spec }).unwrap();
        assert_ne!(d1.x().data(), d2.x().data());
    }
}
