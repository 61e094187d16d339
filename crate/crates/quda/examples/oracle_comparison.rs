//! Fitted rule vs the Bayes rule that knows the true parameters. The oracle
//! bounds what any classifier can achieve; the gap shrinks as the training
//! size grows.
//!
//! ```bash
//! cargo run --release --example oracle_comparison
//! ```

use quda::seed::derive_seed;
use quda::{
    build_truth, estimate_moments, fit, misclassification_rate, oracle_misclassification_rate,
    sample_labeled, AdmmConfig, CvConfig, OracleClassifier, SyntheticSpec,
};

fn main() -> Result<(), quda::QudaError> {
    let spec = SyntheticSpec::new(2, 30, 100, 100, 77)?;
    let truth = build_truth(&spec)?;
    let oracle = OracleClassifier::new(&truth)?;
    let test = sample_labeled(&truth, 2000, 2000, derive_seed(77, "test", 0))?;
    let oracle_mr = oracle_misclassification_rate(&oracle, &test)?;
    println!("Bayes (oracle) test error: {oracle_mr:.4}\n");

    println!("{:>8}  {:>10}  {:>10}", "n/class", "fitted MR", "gap");
    for n in [50_usize, 100, 200, 400] {
        let train = sample_labeled(&truth, n, n, derive_seed(77, "train", n as u64))?;
        let admm = AdmmConfig::default();
        let moments = estimate_moments(&train)?;
        let cv = CvConfig::with_default_grids(&moments, 5, derive_seed(77, "cv", n as u64), 6, 2.0)?;
        let (lambda, lambda_delta, _) = quda::cv_select(&train, &cv, &admm)?;
        let model = fit(&train, lambda, lambda_delta, &admm)?;
        let mr = misclassification_rate(&model, &test)?;
        println!("{n:>8}  {mr:>10.4}  {:>10.4}", mr - oracle_mr);
    }
    Ok(())
}
