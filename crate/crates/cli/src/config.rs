//! Optional TOML configuration mirroring the command-line flags.
//! Explicit flags always win over values from the file.

use std::path::Path;

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub prior: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub ck: Option<f64>,
    #[serde(rename = "Ck")]
    pub big_ck: Option<f64>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub seed: Option<u64>,
    pub adversarial_init: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictSection {
    pub variance: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub suite: Option<String>,
    pub algorithms: Option<String>,
    pub seed: Option<u64>,
    pub ntest: Option<usize>,
    pub concurrency: Option<usize>,
    pub dense_cap: Option<usize>,
    pub max_iters: Option<usize>,
    pub restarts: Option<usize>,
    pub runtime_table: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub predict: PredictSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let body = std::fs::read_to_string(p)
                    .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&body)
                    .map_err(|e| CliError::input(format!("{}: {e}", p.display())))
            }
        }
    }
}
