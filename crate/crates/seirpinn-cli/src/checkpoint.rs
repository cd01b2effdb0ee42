//! Versioned textual checkpoint of a trained model plus the seeds that
//! produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use seirpinn::pinn::PinnModel;

use crate::config::RunConfig;
use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub seed_data: u64,
    pub seed_init: u64,
    pub seed_bo: u64,
    pub rng_algorithm: String,
    pub epsilon: Option<f64>,
    pub model: PinnModel,
}

impl Checkpoint {
    pub fn new(cfg: &RunConfig, model: &PinnModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            seed_data: cfg.seed_data,
            seed_init: cfg.seed_init,
            seed_bo: cfg.seed_bo,
            rng_algorithm: seirpinn::rng::ALGORITHM.to_string(),
            epsilon: model.epsilon(),
            model: model.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string(self).map_err(|e| CliError::Validation(format!("checkpoint: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read checkpoint {path:?}: {e}")))?;
        let cp: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("cannot parse checkpoint {path:?}: {e}")))?;
        if cp.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported checkpoint format {} (expected {FORMAT_VERSION})",
                cp.format_version
            )));
        }
        Ok(cp)
    }
}
