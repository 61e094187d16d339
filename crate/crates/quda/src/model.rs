//! The fitted classifier, the end-to-end fit pipeline, the Bayes oracle for
//! synthetic truths, and model persistence.
//!
//! The decision rule classifies `z` into class 1 when
//! `(z - μ̂)ᵀ Ω̂ (z - μ̂) + δ̂ᵀ (z - μ̂) + η̂ > 0` and into class 2 otherwise
//! (ties go to class 2). Because the rule is a function of `z - μ̂` it is
//! location-invariant; no feature standardization is applied anywhere —
//! rescaling is a modelling decision left to the caller.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::delta::{compute_gamma_hat, solve_delta};
use crate::error::{shape_mismatch, QudaError, Result};
use crate::intercept::{discriminant_raw, search_eta, ScoredSample};
use crate::linalg::{log_det_spd, mat_inverse_spd, Mat, SymMatrix};
use crate::moments::{estimate_moments, ClassLabel, LabeledDataset};
use crate::omega::{AdmmConfig, OmegaSolver};

/// Penalties and solver diagnostics recorded at fit time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitMetadata {
    pub lambda: f64,
    pub lambda_delta: f64,
    pub rho: f64,
    pub admm_iterations: usize,
    pub admm_primal_residual: f64,
    pub admm_dual_residual: f64,
    pub cd_sweeps: usize,
    pub cd_kkt_residual: f64,
    pub insample_error: f64,
    pub omega_support: Vec<(usize, usize)>,
    pub delta_support: Vec<usize>,
}

/// The fitted rule: centroid midpoint, interaction matrix, linear index and
/// intercept. Immutable after fitting; classification is pure.
#[derive(Clone, Debug)]
pub struct QudaModel {
    pub mu: Vec<f64>,
    pub omega: SymMatrix,
    pub delta: Vec<f64>,
    pub eta: f64,
    pub metadata: FitMetadata,
}

impl QudaModel {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Full discriminant value including the intercept.
    pub fn discriminant(&self, z: &[f64]) -> Result<f64> {
        Ok(discriminant_raw(&self.mu, &self.omega, &self.delta, z)? + self.eta)
    }

    /// Class 1 iff the discriminant is strictly positive; ties -> class 2.
    pub fn classify(&self, z: &[f64]) -> Result<ClassLabel> {
        Ok(if self.discriminant(z)? > 0.0 {
            ClassLabel::One
        } else {
            ClassLabel::Two
        })
    }
}

/// Free-function form of [`QudaModel::classify`].
pub fn classify(model: &QudaModel, z: &[f64]) -> Result<ClassLabel> {
    model.classify(z)
}

/// Fits the full pipeline at fixed penalties: moments, interaction matrix,
/// linear index, then the intercept scan over the training scores.
pub fn fit(
    data: &LabeledDataset,
    lambda: f64,
    lambda_delta: f64,
    cfg: &AdmmConfig,
) -> Result<QudaModel> {
    let moments = estimate_moments(data).map_err(|e| e.at_stage("moments"))?;
    let solver = OmegaSolver::new(&moments, cfg).map_err(|e| e.at_stage("omega"))?;
    let omega_sol = solver.solve(lambda).map_err(|e| e.at_stage("omega"))?;
    let gamma = compute_gamma_hat(&moments, &omega_sol.omega).map_err(|e| e.at_stage("delta"))?;
    let delta_sol =
        solve_delta(&moments, &gamma, lambda_delta).map_err(|e| e.at_stage("delta"))?;

    let mu = moments.mu_mid();
    let mut scored = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let score = discriminant_raw(&mu, &omega_sol.omega, &delta_sol.delta, data.row(i))
            .map_err(|e| e.at_stage("intercept"))?;
        scored.push(ScoredSample {
            score,
            label01: data.labels()[i].indicator_class1(),
        });
    }
    let (eta, insample_error) = search_eta(&scored).map_err(|e| e.at_stage("intercept"))?;

    Ok(QudaModel {
        mu,
        eta,
        metadata: FitMetadata {
            lambda,
            lambda_delta,
            rho: omega_sol.rho,
            admm_iterations: omega_sol.iterations,
            admm_primal_residual: omega_sol.primal_residual,
            admm_dual_residual: omega_sol.dual_residual,
            cd_sweeps: delta_sol.iterations,
            cd_kkt_residual: delta_sol.kkt_residual,
            insample_error,
            omega_support: omega_sol.support,
            delta_support: delta_sol.support(),
        },
        omega: omega_sol.omega,
        delta: delta_sol.delta,
    })
}

/// Ground-truth parameters of a synthetic two-class Gaussian model.
#[derive(Clone, Debug)]
pub struct SyntheticTruth {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub sigma1: SymMatrix,
    pub sigma2: SymMatrix,
    /// Σ₂⁻¹ - Σ₁⁻¹.
    pub omega_true: SymMatrix,
    /// (Σ₁⁻¹ + Σ₂⁻¹)(μ₁ - μ₂).
    pub delta_true: Vec<f64>,
    pub pi1: f64,
    pub pi2: f64,
}

impl SyntheticTruth {
    /// Validates dimensions, SPD covariances, priors, and consistency of
    /// `omega_true` with the inverse covariances.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu1: Vec<f64>,
        mu2: Vec<f64>,
        sigma1: SymMatrix,
        sigma2: SymMatrix,
        omega_true: SymMatrix,
        delta_true: Vec<f64>,
        pi1: f64,
        pi2: f64,
    ) -> Result<Self> {
        let p = mu1.len();
        if mu2.len() != p
            || sigma1.dim() != p
            || sigma2.dim() != p
            || omega_true.dim() != p
            || delta_true.len() != p
        {
            return Err(shape_mismatch(
                format!("all components of dimension {p}"),
                "inconsistent truth dimensions".to_string(),
            ));
        }
        if !(pi1 > 0.0 && pi2 > 0.0 && (pi1 + pi2 - 1.0).abs() < 1e-12) {
            return Err(QudaError::InvalidSpec(format!(
                "priors must be positive and sum to one, got ({pi1}, {pi2})"
            )));
        }
        let inv1 = mat_inverse_spd(&sigma1)?;
        let inv2 = mat_inverse_spd(&sigma2)?;
        let recon = inv2.as_mat().sub(inv1.as_mat());
        let err = recon.sub(omega_true.as_mat()).max_abs();
        if err > crate::constants::TRUTH_CONSISTENCY_TOL {
            return Err(QudaError::InvalidSpec(format!(
                "omega_true disagrees with precision difference by {err:.3e}"
            )));
        }
        Ok(SyntheticTruth {
            mu1,
            mu2,
            sigma1,
            sigma2,
            omega_true,
            delta_true,
            pi1,
            pi2,
        })
    }

    pub fn p(&self) -> usize {
        self.mu1.len()
    }

    /// Unique upper-triangle support of the true interaction matrix.
    pub fn omega_support(&self) -> Vec<(usize, usize)> {
        let p = self.p();
        let mut s = Vec::new();
        for i in 0..p {
            for j in i..p {
                if self.omega_true.get(i, j).abs() > crate::constants::TRUTH_SUPPORT_TOL {
                    s.push((i, j));
                }
            }
        }
        s
    }

    /// Support of the true linear index.
    pub fn delta_support(&self) -> Vec<usize> {
        self.delta_true
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > crate::constants::TRUTH_SUPPORT_TOL)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Bayes rule under a known truth, with the inverses and log-determinants
/// precomputed once.
pub struct OracleClassifier {
    inv1: SymMatrix,
    inv2: SymMatrix,
    log_det1: f64,
    log_det2: f64,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    log_pi1: f64,
    log_pi2: f64,
}

impl OracleClassifier {
    pub fn new(truth: &SyntheticTruth) -> Result<Self> {
        Ok(OracleClassifier {
            inv1: mat_inverse_spd(&truth.sigma1)?,
            inv2: mat_inverse_spd(&truth.sigma2)?,
            log_det1: log_det_spd(&truth.sigma1)?,
            log_det2: log_det_spd(&truth.sigma2)?,
            mu1: truth.mu1.clone(),
            mu2: truth.mu2.clone(),
            log_pi1: truth.pi1.ln(),
            log_pi2: truth.pi2.ln(),
        })
    }

    fn log_posterior(&self, z: &[f64], class1: bool) -> f64 {
        let (mu, inv, log_det, log_pi) = if class1 {
            (&self.mu1, &self.inv1, self.log_det1, self.log_pi1)
        } else {
            (&self.mu2, &self.inv2, self.log_det2, self.log_pi2)
        };
        let centered: Vec<f64> = z.iter().zip(mu).map(|(a, b)| a - b).collect();
        let mut quad = 0.0;
        for (i, &ci) in centered.iter().enumerate() {
            quad += ci * crate::linalg::dot(inv.row(i), &centered);
        }
        log_pi - 0.5 * log_det - 0.5 * quad
    }

    /// Compares class posteriors; ties -> class 2.
    pub fn classify(&self, z: &[f64]) -> Result<ClassLabel> {
        if z.len() != self.mu1.len() {
            return Err(shape_mismatch(
                format!("dimension {}", self.mu1.len()),
                format!("{}", z.len()),
            ));
        }
        Ok(
            if self.log_posterior(z, true) > self.log_posterior(z, false) {
                ClassLabel::One
            } else {
                ClassLabel::Two
            },
        )
    }
}

/// One-shot Bayes classification under `truth`. Builds the cached
/// classifier internally; use [`OracleClassifier`] directly when classifying
/// many points.
pub fn oracle_classify(truth: &SyntheticTruth, z: &[f64]) -> Result<ClassLabel> {
    OracleClassifier::new(truth)?.classify(z)
}

/// Analytic intercept of the Bayes rule:
/// `2 log(π₁/π₂) + (1/4) Δμᵀ Ω Δμ + log|Σ₂| - log|Σ₁|`.
pub fn analytic_eta(truth: &SyntheticTruth) -> Result<f64> {
    let diff: Vec<f64> = truth
        .mu1
        .iter()
        .zip(&truth.mu2)
        .map(|(a, b)| a - b)
        .collect();
    let od = truth.omega_true.as_mat().matvec(&diff)?;
    let quad = crate::linalg::dot(&diff, &od);
    Ok(2.0 * (truth.pi1 / truth.pi2).ln() + 0.25 * quad + log_det_spd(&truth.sigma2)?
        - log_det_spd(&truth.sigma1)?)
}

// --- persistence -----------------------------------------------------------

const SCHEMA_NAME: &str = "quda-model";
const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    version: u32,
    p: usize,
    mu: String,
    omega: String,
    delta: String,
    eta: f64,
    metadata: FitMetadata,
}

fn encode_f64s(values: &[f64]) -> String {
    use base64::Engine;
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn decode_f64s(encoded: &str, expected_len: usize, what: &str) -> Result<Vec<f64>> {
    use base64::Engine;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(encoded)
        .map_err(|e| QudaError::CorruptPayload(format!("{what}: {e}")))?;
    if bytes.len() != expected_len * 8 {
        return Err(QudaError::CorruptPayload(format!(
            "{what}: expected {} bytes, got {}",
            expected_len * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Writes the model as versioned JSON. Arrays are embedded as base64
/// little-endian f64 so the round trip is bit-exact; scalars stay as plain
/// JSON numbers for readability.
pub fn save_model(model: &QudaModel, path: impl AsRef<Path>) -> Result<()> {
    let p = model.dim();
    let file = ModelFile {
        schema: SCHEMA_NAME.to_string(),
        version: SCHEMA_VERSION,
        p,
        mu: encode_f64s(&model.mu),
        omega: encode_f64s(model.omega.data()),
        delta: encode_f64s(&model.delta),
        eta: model.eta,
        metadata: model.metadata.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| QudaError::CorruptPayload(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Reads a model written by [`save_model`], verifying schema and payload.
pub fn load_model(path: impl AsRef<Path>) -> Result<QudaModel> {
    let raw = std::fs::read_to_string(path)?;
    let file: ModelFile =
        serde_json::from_str(&raw).map_err(|e| QudaError::CorruptPayload(e.to_string()))?;
    if file.schema != SCHEMA_NAME {
        return Err(QudaError::CorruptPayload(format!(
            "unexpected schema name {:?}",
            file.schema
        )));
    }
    if file.version != SCHEMA_VERSION {
        return Err(QudaError::SchemaVersionMismatch {
            found: file.version,
            expected: SCHEMA_VERSION,
        });
    }
    let p = file.p;
    if p == 0 {
        return Err(QudaError::CorruptPayload("p must be positive".into()));
    }
    let mu = decode_f64s(&file.mu, p, "mu")?;
    let omega_data = decode_f64s(&file.omega, p * p, "omega")?;
    let delta = decode_f64s(&file.delta, p, "delta")?;
    let mut omega = Mat::zeros(p, p);
    omega.data_mut().copy_from_slice(&omega_data);
    let omega = SymMatrix::new(omega)
        .map_err(|e| QudaError::CorruptPayload(format!("omega not symmetric: {e}")))?;
    Ok(QudaModel {
        mu,
        omega,
        delta,
        eta: file.eta,
        metadata: file.metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::ClassLabel;

    fn toy_model(p: usize) -> QudaModel {
        QudaModel {
            mu: vec![0.0; p],
            omega: SymMatrix::zeros(p),
            delta: {
                let mut d = vec![0.0; p];
                d[0] = 1.0;
                d
            },
            eta: 0.0,
            metadata: FitMetadata {
                lambda: 0.1,
                lambda_delta: 0.2,
                rho: 1.0,
                admm_iterations: 5,
                admm_primal_residual: 1e-9,
                admm_dual_residual: 1e-9,
                cd_sweeps: 3,
                cd_kkt_residual: 1e-10,
                insample_error: 0.0,
                omega_support: vec![],
                delta_support: vec![0],
            },
        }
    }

    #[test]
    fn classify_examples() {
        let mut m = toy_model(2);
        // Ω = 0, δ = e₁, μ = 0, η = 0, z = (2, 0) -> positive -> class 1.
        assert_eq!(m.classify(&[2.0, 0.0]).unwrap(), ClassLabel::One);
        // z = μ with η = -1 -> class 2; with η = +1 -> class 1.
        m.eta = -1.0;
        assert_eq!(m.classify(&[0.0, 0.0]).unwrap(), ClassLabel::Two);
        m.eta = 1.0;
        assert_eq!(m.classify(&[0.0, 0.0]).unwrap(), ClassLabel::One);
        // Tie (discriminant exactly 0) -> class 2.
        m.eta = 0.0;
        assert_eq!(m.classify(&[0.0, 0.0]).unwrap(), ClassLabel::Two);
        assert!(m.classify(&[0.0]).is_err());
    }

    #[test]
    fn oracle_prefers_nearer_centroid() {
        let truth = SyntheticTruth::new(
            vec![2.0, 0.0],
            vec![0.0, 0.0],
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            SymMatrix::zeros(2),
            vec![4.0, 0.0], // (I + I)(μ₁ - μ₂)
            0.5,
            0.5,
        )
        .unwrap();
        assert_eq!(
            oracle_classify(&truth, &[2.0, 0.0]).unwrap(),
            ClassLabel::One
        );
        // Equidistant point is a tie -> class 2.
        assert_eq!(
            oracle_classify(&truth, &[1.0, 0.0]).unwrap(),
            ClassLabel::Two
        );
    }

    #[test]
    fn save_load_roundtrip_is_bitwise() {
        let mut model = toy_model(3);
        model.mu = vec![0.1, -0.2, 1.0 / 3.0];
        model.delta = vec![f64::MIN_POSITIVE, 2.0_f64.sqrt(), -1e300];
        model.eta = std::f64::consts::PI;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model.mu, loaded.mu);
        assert_eq!(model.delta, loaded.delta);
        assert_eq!(model.eta.to_bits(), loaded.eta.to_bits());
        assert_eq!(model.omega.data(), loaded.omega.data());
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let model = toy_model(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"version\": 1", "\"version\": 99");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(QudaError::SchemaVersionMismatch {
                found: 99,
                expected: 1
            })
        ));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let model = toy_model(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(QudaError::CorruptPayload(_))
        ));
    }

    #[test]
    fn truncated_payload_is_corrupt() {
        let model = toy_model(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        // Shorten the base64 mu array but keep valid JSON.
        let text = std::fs::read_to_string(&path).unwrap();
        let file: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut file = file;
        file["mu"] = serde_json::Value::String("AAAA".into());
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(QudaError::CorruptPayload(_))
        ));
    }
}
