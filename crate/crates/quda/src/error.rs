//! Error type shared by the whole crate.

use crate::omega::OmegaSolution;

/// Errors produced by estimators, solvers and model persistence.
#[derive(Debug, thiserror::Error)]
pub enum QudaError {
    #[error("{what} contains a NaN or infinite entry")]
    NonFinite { what: &'static str },

    #[error("matrices/vectors have incompatible shapes: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("soft-threshold level must be nonnegative, got {0}")]
    NegativeThreshold(f64),

    #[error("eigendecomposition did not converge within {sweeps} Jacobi sweeps (off-diagonal {off_diag:.3e})")]
    EigenNoConvergence { sweeps: usize, off_diag: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("ADMM penalty parameter rho must be positive, got {0}")]
    NonPositiveRho(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "ADMM stopped at {iterations} iterations with residuals above tolerance \
         (primal {primal_residual:.3e}, dual {dual_residual:.3e})"
    )]
    AdmmNoConvergence {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        /// Best iterate reached before the budget ran out.
        best: Box<OmegaSolution>,
    },

    #[error("coordinate descent stopped after {sweeps} sweeps with max coordinate change {max_change:.3e}")]
    CdNoConvergence { sweeps: usize, max_change: f64 },

    #[error("variable {index} has no variance in either class (diagonal entry {value:.3e})")]
    ZeroDiagonal { index: usize, value: f64 },

    #[error("class {label} has only {count} observations; at least {required} are required")]
    ClassTooSmall { label: u8, count: usize, required: usize },

    #[error("no observations with label {label}")]
    MissingClass { label: u8 },

    #[error("labels must be 1 or 2, found {found} at row {row}")]
    InvalidLabel { found: String, row: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("each class needs at least {folds} members for {folds}-fold cross-validation (class {label} has {count})")]
    TooFewPerClass { label: u8, count: usize, folds: usize },

    #[error("invalid synthetic model specification: {0}")]
    InvalidSpec(String),

    #[error("{stage}: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: Box<QudaError>,
    },

    #[error("replication {rep}: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<QudaError>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file has schema version {found}, expected {expected}")]
    SchemaVersionMismatch { found: u32, expected: u32 },

    #[error("corrupt model payload: {0}")]
    CorruptPayload(String),
}

impl QudaError {
    /// Wraps an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        QudaError::Pipeline {
            stage,
            source: Box::new(self),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QudaError>;

pub(crate) fn shape_mismatch(expected: impl Into<String>, actual: impl Into<String>) -> QudaError {
    QudaError::ShapeMismatch {
        expected: expected.into(),
        actual: actual.into(),
    }
}
