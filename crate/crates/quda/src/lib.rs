//! Sparse quadratic discriminant analysis for high-dimensional binary
//! classification.
//!
//! The Bayes rule for two Gaussian classes classifies `z` into class 1 when
//!
//! ```text
//!   D(z) = (z - μ)ᵀ Ω (z - μ) + δᵀ (z - μ) + η > 0,
//! ```
//!
//! where `μ` is the centroid midpoint, `Ω = Σ₂⁻¹ - Σ₁⁻¹` is the difference
//! of the class precision matrices (its nonzeros are the quadratic
//! interactions), `δ = (Σ₁⁻¹ + Σ₂⁻¹)(μ₁ - μ₂)` is the linear index (its
//! nonzeros are the main effects) and `η` is a scalar intercept. This crate
//! estimates the components directly under sparsity penalties, never
//! inverting a sample covariance:
//!
//! * [`omega`] — an ADMM solver with closed-form updates for the penalized
//!   quadratic loss whose minimizer is `Ω`; O(p³) per iteration and O(p²)
//!   memory, with the eigendecompositions taken once per fit.
//! * [`delta`] — a coordinate-descent lasso for `δ` built on the plug-in
//!   target `γ̂ = 4(μ̂₁ - μ̂₂) + (Σ̂₁ - Σ̂₂) Ω̂ (μ̂₁ - μ̂₂)`.
//! * [`intercept`] — an exact in-sample error scan for `η`.
//! * [`tuning`] — joint 5-fold cross-validation over the two penalty grids.
//! * [`synth`] / [`metrics`] — the five synthetic benchmark models, the
//!   Bayes oracle, and a replication harness with mean/standard-error
//!   tables.
//!
//! The `quda` binary exposes `simulate`, `fit`, `predict` and `benchmark`
//! subcommands over CSV/JSON files; the `examples/` directory shows each
//! library capability end to end.

// Index loops are the natural idiom for the dense kernels here, and the
// negated comparisons are deliberate NaN-rejecting guards.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod seed;

pub mod linalg;
pub mod moments;

pub mod delta;
pub mod intercept;
pub mod omega;

pub mod model;
pub mod synth;
pub mod tuning;

pub mod metrics;

pub mod cli;

pub use error::{QudaError, Result};
pub use linalg::{
    log_det_spd, mat_inverse_spd, soft_threshold_mat, soft_threshold_scalar, soft_threshold_vec,
    sym_eigen, Mat, SymEigen, SymMatrix,
};
pub use model::{
    analytic_eta, classify, fit, load_model, oracle_classify, save_model, FitMetadata,
    OracleClassifier, QudaModel, SyntheticTruth,
};
pub use moments::{estimate_moments, ClassLabel, ClassMoments, LabeledDataset};
pub use omega::{
    build_b_matrix, kkt_residual_omega, omega_update, solve_omega, AdmmConfig, OmegaSolution,
    OmegaSolver,
};
pub use delta::{compute_gamma_hat, solve_delta, DeltaSolution};
pub use intercept::{discriminant_raw, search_eta, ScoredSample};
pub use metrics::{
    aggregate, format_table, misclassification_rate, oracle_misclassification_rate,
    run_benchmark, support_metrics, write_rep_log, Aggregate, BenchSummary, CvGridSpec,
    RepReport, SupportCounts,
};
pub use synth::{build_truth, make_dataset, sample_labeled, sample_mvn, SyntheticSpec};
pub use tuning::{cv_select, log_grid, stratified_folds, CvConfig, CvTable};
