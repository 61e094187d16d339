//! End-to-end fit on simulated data: estimate the interaction matrix, the
//! linear index and the intercept, classify a fresh test draw, and round-trip
//! the model through its JSON file format.
//!
//! ```bash
//! cargo run --release --example fit_and_classify
//! ```

use quda::seed::derive_seed;
use quda::{
    fit, load_model, make_dataset, misclassification_rate, sample_labeled, save_model,
    AdmmConfig, SyntheticSpec,
};

fn main() -> Result<(), quda::QudaError> {
    let spec = SyntheticSpec::new(2, 50, 100, 100, 7)?;
    let (train, truth) = make_dataset(&spec)?;
    println!(
        "training data: {} rows, {} features (decaying-precision model)",
        train.n(),
        train.p()
    );

    let model = fit(&train, 0.5, 0.3, &AdmmConfig::default())?;
    let md = &model.metadata;
    println!(
        "fit: {} ADMM iterations (rho {:.3}), {} lasso sweeps",
        md.admm_iterations, md.rho, md.cd_sweeps
    );
    println!(
        "support: {} interaction entries, {} main effects, intercept {:.3}",
        md.omega_support.len(),
        md.delta_support.len(),
        model.eta
    );
    println!("in-sample error: {:.3}", md.insample_error);

    let test = sample_labeled(&truth, 1000, 1000, derive_seed(7, "demo-test", 0))?;
    let mr = misclassification_rate(&model, &test)?;
    println!("test misclassification rate: {:.3}", mr);

    let dir = std::env::temp_dir().join("quda_example_model.json");
    save_model(&model, &dir)?;
    let reloaded = load_model(&dir)?;
    assert_eq!(model.eta.to_bits(), reloaded.eta.to_bits());
    println!("model round-tripped bit-exactly through {}", dir.display());
    Ok(())
}
