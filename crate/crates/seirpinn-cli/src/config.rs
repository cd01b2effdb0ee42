//! Run configuration: a single human-readable TOML file with every
//! experiment default baked in; command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use seirpinn::pipeline::ExperimentConfig;
use seirpinn::seir::{EpiParams, SeirState};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // Scenario rates; beta and gamma are known, true_epsilon only generates
    // the ground truth.
    pub beta: f64,
    pub gamma: f64,
    pub true_epsilon: f64,
    // Known initial state.
    pub s0: f64,
    pub e0: f64,
    pub i0: f64,
    pub r0: f64,
    // Time domain and solver grid.
    pub t_end: f64,
    pub dt: f64,
    // Observation counts.
    pub n_train: usize,
    pub n_test: usize,
    // Seeds.
    pub seed_data: u64,
    pub seed_init: u64,
    pub seed_bo: u64,
    // Inner loop.
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden_layers: Vec<usize>,
    // Loss weighting.
    pub lambda_data: f64,
    pub lambda_eq: f64,
    pub lambda_init: f64,
    pub c_proposed: [f64; 4],
    pub c_baseline: [f64; 4],
    // Outer loop.
    pub bo_iterations: usize,
    pub bo_init_count: usize,
    pub bo_lo: f64,
    pub bo_hi: f64,
    // Single-run entry points.
    pub epsilon_candidate: f64,
    pub epsilon_init: f64,
    // Output directory.
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta: 0.26,
            gamma: 0.1,
            true_epsilon: 0.2,
            s0: 0.99,
            e0: 0.0,
            i0: 0.01,
            r0: 0.0,
            t_end: 200.0,
            dt: 0.2,
            n_train: 50,
            n_test: 50,
            seed_data: 1,
            seed_init: 2,
            seed_bo: 3,
            epochs: 30000,
            learning_rate: 1e-3,
            hidden_layers: vec![50, 50, 50],
            lambda_data: 1.0,
            lambda_eq: 1.0,
            lambda_init: 1.0,
            c_proposed: [1.0, 1.0, 1.0, 1.0],
            c_baseline: [0.0, 0.0, 1.0, 0.0],
            bo_iterations: 30,
            bo_init_count: 5,
            bo_lo: 0.0,
            bo_hi: 0.5,
            epsilon_candidate: 0.2,
            epsilon_init: 0.1,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {path:?}: {e}")))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("cannot parse config {path:?}: {e}")))?;
        Ok(cfg)
    }

    /// Check every field before any compute runs.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params_true().map_err(|e| CliError::Validation(e.to_string()))?;
        self.init_state().map_err(|e| CliError::Validation(e.to_string()))?;
        let positive = [
            ("t_end", self.t_end),
            ("dt", self.dt),
            ("learning_rate", self.learning_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Validation(format!("{name} must be positive (got {v})")));
            }
        }
        if self.n_train < 2 || self.n_test < 2 {
            return Err(CliError::Validation(format!(
                "need at least 2 observation points (got n_train = {}, n_test = {})",
                self.n_train, self.n_test
            )));
        }
        if self.epochs == 0 {
            return Err(CliError::Validation("epochs must be at least 1".into()));
        }
        if self.hidden_layers.is_empty() || self.hidden_layers.iter().any(|&h| h == 0) {
            return Err(CliError::Validation("hidden_layers must be non-empty and positive".into()));
        }
        if self.bo_init_count < 1 || self.bo_iterations < self.bo_init_count {
            return Err(CliError::Validation(format!(
                "need bo_iterations >= bo_init_count >= 1 (got {} and {})",
                self.bo_iterations, self.bo_init_count
            )));
        }
        if !(self.bo_lo.is_finite() && self.bo_hi.is_finite() && self.bo_lo < self.bo_hi) {
            return Err(CliError::Validation(format!(
                "bad search box [{}, {}]",
                self.bo_lo, self.bo_hi
            )));
        }
        let weights = [
            ("lambda_data", self.lambda_data),
            ("lambda_eq", self.lambda_eq),
            ("lambda_init", self.lambda_init),
        ];
        for (name, v) in weights {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Validation(format!("{name} must be >= 0 (got {v})")));
            }
        }
        for c in self.c_proposed.iter().chain(&self.c_baseline) {
            if !(c.is_finite() && *c >= 0.0) {
                return Err(CliError::Validation("C weights must be >= 0".into()));
            }
        }
        if !(self.epsilon_candidate.is_finite() && self.epsilon_candidate > 0.0) {
            return Err(CliError::Validation(format!(
                "epsilon_candidate must be positive (got {})",
                self.epsilon_candidate
            )));
        }
        if !self.epsilon_init.is_finite() {
            return Err(CliError::Validation("epsilon_init must be finite".into()));
        }
        Ok(())
    }

    pub fn params_true(&self) -> Result<EpiParams, seirpinn::seir::SimError> {
        EpiParams::new(self.beta, self.true_epsilon, self.gamma)
    }

    pub fn init_state(&self) -> Result<SeirState, seirpinn::seir::SimError> {
        SeirState::new(self.s0, self.e0, self.i0, self.r0)
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut shape = vec![1];
        shape.extend_from_slice(&self.hidden_layers);
        shape.push(4);
        shape
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        self.validate()?;
        Ok(ExperimentConfig {
            params_true: self.params_true().map_err(|e| CliError::Validation(e.to_string()))?,
            init: self.init_state().map_err(|e| CliError::Validation(e.to_string()))?,
            t_end: self.t_end,
            dt: self.dt,
            n_train: self.n_train,
            n_test: self.n_test,
            seed_data: self.seed_data,
            seed_init: self.seed_init,
            seed_bo: self.seed_bo,
            epochs: self.epochs,
            lr: self.learning_rate,
            shape: self.shape(),
            lambda: [self.lambda_data, self.lambda_eq, self.lambda_init],
            c_proposed: self.c_proposed,
            c_baseline: self.c_baseline,
            bo_iterations: self.bo_iterations,
            bo_init_count: self.bo_init_count,
            bo_lo: self.bo_lo,
            bo_hi: self.bo_hi,
        })
    }
}
