//! Versioned model persistence.
//!
//! Every field of the fitted model is stored (factors, centered responses,
//! hyperparameters, per-factor eigendecompositions, the solved tensor and
//! fit diagnostics), so loading redoes no linear algebra and reproduces
//! predictions bit for bit. JSON numbers round-trip f64 exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::FactorSpec;
use crate::error::{CliError, Result};
use gridgp::design::{Factor, FactorialDesign, HyperParams};
use gridgp::eig::EigenPair;
use gridgp::gp::{FittedModel, TrainingData};
use gridgp::hyperopt::{FitReport, PriorSpec};
use gridgp::tensor::{Matrix, Tensor};

pub const MODEL_FORMAT: &str = "gridgp-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSpec {
    /// Row-major `n × n` eigenvector matrix (columns are eigenvectors).
    pub u: Vec<f64>,
    /// Eigenvalues, descending.
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorFileSpec {
    pub alpha: f64,
    pub beta: f64,
    pub c: Vec<f64>,
    pub big_c: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub loglik: f64,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: String,
    pub restart_index: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub factors: Vec<FactorSpec>,
    /// Per-factor inverse length-scales.
    pub theta: Vec<Vec<f64>>,
    pub sigma_f: f64,
    pub sigma_noise: f64,
    pub y_mean: f64,
    /// Centered responses in canonical order.
    pub y_centered: Vec<f64>,
    pub eig: Vec<EigenSpec>,
    /// Solved tensor with `vec(alpha) = K_y⁻¹ vec(y)`.
    pub alpha: Vec<f64>,
    /// Jitter that was added to the eigenvalue tensor at fit time.
    pub jitter: f64,
    /// Prior used during training, if any.
    pub prior: Option<PriorFileSpec>,
    pub diagnostics: Diagnostics,
}

impl ModelFile {
    pub fn from_model(
        model: &FittedModel,
        prior: Option<&PriorSpec>,
        report: &FitReport,
    ) -> Self {
        let design = model.data().design();
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            factors: design
                .factors()
                .iter()
                .map(|f| FactorSpec {
                    dim: f.dim(),
                    points: f.points().map(<[f64]>::to_vec).collect(),
                })
                .collect(),
            theta: model.params().theta.clone(),
            sigma_f: model.params().sigma_f,
            sigma_noise: model.params().sigma_noise,
            y_mean: model.data().y_mean(),
            y_centered: model.data().y().as_slice().to_vec(),
            eig: model
                .eigenpairs()
                .iter()
                .map(|e| EigenSpec {
                    u: e.u.data().to_vec(),
                    d: e.d.clone(),
                })
                .collect(),
            alpha: model.alpha().as_slice().to_vec(),
            jitter: model.jitter(),
            prior: prior.map(|p| PriorFileSpec {
                alpha: p.alpha,
                beta: p.beta,
                c: p.c.clone(),
                big_c: p.big_c.clone(),
            }),
            diagnostics: Diagnostics {
                loglik: model.loglik(),
                objective: report.objective,
                iterations: report.iterations,
                evaluations: report.evaluations,
                termination: report.termination.to_string(),
                restart_index: report.restart_index,
                warnings: report.warnings.clone(),
            },
        }
    }

    pub fn into_model(self) -> Result<FittedModel> {
        if self.format != MODEL_FORMAT {
            return Err(CliError::input(format!(
                "unrecognized format tag {:?}, expected {MODEL_FORMAT:?}",
                self.format
            )));
        }
        if self.version > MODEL_VERSION {
            return Err(CliError::input(format!(
                "model version {} is newer than the supported version {MODEL_VERSION}",
                self.version
            )));
        }
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                Factor::new(f.dim, f.points.clone())
                    .map_err(|e| CliError::input(format!("factor {k}: {e}")))
            })
            .collect::<Result<_>>()?;
        let design =
            FactorialDesign::new(factors).map_err(|e| CliError::input(e.to_string()))?;
        let data = TrainingData::from_centered(design.clone(), self.y_centered, self.y_mean)
            .map_err(|e| CliError::input(e.to_string()))?;
        let params = HyperParams::new(self.theta, self.sigma_f, self.sigma_noise);
        let eig: Vec<EigenPair> = self
            .eig
            .into_iter()
            .zip(design.sizes())
            .map(|(e, n)| {
                Ok(EigenPair {
                    u: Matrix::new(n, n, e.u).map_err(CliError::from)?,
                    d: e.d,
                })
            })
            .collect::<Result<_>>()?;
        let alpha =
            Tensor::new(design.shape(), self.alpha).map_err(CliError::from)?;
        Ok(FittedModel::from_parts(
            data,
            params,
            eig,
            alpha,
            self.jitter,
            self.diagnostics.loglik,
        )?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::input(format!("serialization: {e}")))?;
        std::fs::write(path, body + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&body)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

pub fn load_model(path: &Path) -> Result<FittedModel> {
    ModelFile::load(path)?.into_model()
}
