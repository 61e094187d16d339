//! Numerical tolerances and iteration budgets shared by the solvers and tests.
//!
//! Every tolerance used by more than one module lives here so that solver
//! behaviour and test assertions cannot drift apart.

/// Maximum asymmetry |a_ij - a_ji| accepted by [`crate::linalg::SymMatrix`] constructors.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Orthogonality bound for eigenvector matrices: ||UᵀU - I||_max.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Relative reconstruction bound for the symmetric eigendecomposition:
/// ||U diag(d) Uᵀ - A||_max <= EIGEN_RECON_TOL * (1 + ||A||_max).
pub const EIGEN_RECON_TOL: f64 = 1e-8;

/// Sweep budget for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Off-diagonal magnitudes below `JACOBI_OFF_TOL * scale` count as converged.
pub const JACOBI_OFF_TOL: f64 = 1e-14;

/// An eigenvalue d is treated as positive when d > SPD_REL_TOL * d_max.
pub const SPD_REL_TOL: f64 = 1e-12;

/// Additive guard inside the default ADMM penalty heuristic.
pub const RHO_EPSILON: f64 = 1e-8;

/// Coordinate descent stops once no coordinate moves more than this in a sweep.
pub const CD_SWEEP_TOL: f64 = 1e-8;

/// Sweep budget for the coordinate-descent lasso.
pub const CD_MAX_SWEEPS: usize = 100_000;

/// Entries of a true parameter with magnitude above this belong to its support.
pub const TRUTH_SUPPORT_TOL: f64 = 1e-10;

/// ||Ω - (Σ₂⁻¹ - Σ₁⁻¹)||_max accepted when validating synthetic ground truth.
pub const TRUTH_CONSISTENCY_TOL: f64 = 1e-8;

/// Smallest eigenvalue allowed for the class-2 precision matrix in the random
/// sparse synthetic model; smaller-but-positive spectra are floored here.
pub const SPARSE_MODEL_EIG_FLOOR: f64 = 0.05;

/// Draws whose class-2 precision has an eigenvalue below this are rejected
/// and regenerated from the next sub-seed.
pub const SPARSE_MODEL_EIG_REJECT: f64 = 0.01;

/// Regeneration budget for the random sparse synthetic model.
pub const SPARSE_MODEL_MAX_RETRIES: u64 = 64;

/// Target 2-norm condition number of the random sparse interaction matrix.
pub const SPARSE_MODEL_CONDITION: f64 = 10.0;
