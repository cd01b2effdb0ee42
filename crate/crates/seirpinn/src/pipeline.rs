//! Orchestration of the two outer-loop experiments.
//!
//! Proposed: reconstruct pseudo-data at each candidate onset rate, train the
//! network in the fixed-rate mode, and let Bayesian optimization minimize
//! the minimum test error. Baseline: optimize the initial value of the
//! trainable onset rate for the inverse-problem mode instead.

use thiserror::Error;

use crate::gpbo::{self, BoOptions, BoResult, GpError};
use crate::pinn::{self, LossWeights, PinnError, PinnModel, TrainMode, TrainRecord};
use crate::recon::{reconstruct, ReconConfig, ReconError};
use crate::seir::{self, EpiParams, ObservationSet, SampleMode, SeirState, SimError, Trajectory};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Recon(#[from] ReconError),
    #[error(transparent)]
    Pinn(#[from] PinnError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

/// Everything a reproduction run needs, resolved up front.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params_true: EpiParams,
    pub init: SeirState,
    pub t_end: f64,
    pub dt: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed_data: u64,
    pub seed_init: u64,
    pub seed_bo: u64,
    pub epochs: usize,
    pub lr: f64,
    pub shape: Vec<usize>,
    pub lambda: [f64; 3],
    pub c_proposed: [f64; 4],
    pub c_baseline: [f64; 4],
    pub bo_iterations: usize,
    pub bo_init_count: usize,
    pub bo_lo: f64,
    pub bo_hi: f64,
}

impl Default for ExperimentConfig {
    /// The experiment defaults: 30000-epoch inner runs, 30 BO evaluations
    /// over `[0, 0.5]`.
    fn default() -> Self {
        Self {
            params_true: seir::default_params(),
            init: seir::default_init(),
            t_end: 200.0,
            dt: 0.2,
            n_train: 50,
            n_test: 50,
            seed_data: 1,
            seed_init: 2,
            seed_bo: 3,
            epochs: 30000,
            lr: 1e-3,
            shape: pinn::DEFAULT_SHAPE.to_vec(),
            lambda: [1.0, 1.0, 1.0],
            c_proposed: [1.0, 1.0, 1.0, 1.0],
            c_baseline: [0.0, 0.0, 1.0, 0.0],
            bo_iterations: 30,
            bo_init_count: 5,
            bo_lo: 0.0,
            bo_hi: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn bo_options(&self) -> BoOptions {
        let mut opts = BoOptions::new(self.bo_iterations, self.bo_init_count, self.seed_bo);
        opts.lo = self.bo_lo;
        opts.hi = self.bo_hi;
        opts
    }

    pub fn weights_proposed(&self) -> LossWeights {
        LossWeights {
            c: self.c_proposed,
            lambda_data: self.lambda[0],
            lambda_eq: self.lambda[1],
            lambda_init: self.lambda[2],
        }
    }

    pub fn weights_baseline(&self) -> LossWeights {
        LossWeights {
            c: self.c_baseline,
            lambda_data: self.lambda[0],
            lambda_eq: self.lambda[1],
            lambda_init: self.lambda[2],
        }
    }
}

/// Ground truth plus raw (derivative-bearing) observation sets; test times
/// are drawn once per run and reused across all candidate onset rates.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub traj: Trajectory,
    pub obs_train: ObservationSet,
    pub obs_test: ObservationSet,
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData, PipelineError> {
    let traj = seir::simulate(&cfg.params_true, &cfg.init, cfg.t_end, cfg.dt)?;
    let obs_train =
        seir::sample_observations(&traj, &cfg.params_true, cfg.n_train, SampleMode::Train, cfg.seed_data)?;
    let obs_test =
        seir::sample_observations(&traj, &cfg.params_true, cfg.n_test, SampleMode::Test, cfg.seed_data)?;
    Ok(PreparedData { traj, obs_train, obs_test })
}

fn recon_both(
    data: &PreparedData,
    cfg: &ExperimentConfig,
    eps: f64,
) -> Result<(ObservationSet, ObservationSet), ReconError> {
    let rc = ReconConfig::new(eps, cfg.params_true.beta, cfg.params_true.gamma);
    Ok((reconstruct(&data.obs_train, &rc)?, reconstruct(&data.obs_test, &rc)?))
}

fn inner_params(cfg: &ExperimentConfig, eps: f64) -> EpiParams {
    EpiParams { beta: cfg.params_true.beta, epsilon: eps, gamma: cfg.params_true.gamma }
}

/// Train the fixed-rate mode on pseudo-data reconstructed at `eps`.
pub fn train_proposed_at(
    data: &PreparedData,
    cfg: &ExperimentConfig,
    eps: f64,
) -> Result<(PinnModel, TrainRecord), PipelineError> {
    let (obs_train, obs_test) = recon_both(data, cfg, eps)?;
    let model = PinnModel::with_shape(&cfg.shape, cfg.seed_init, cfg.t_end)?;
    let out = pinn::train(
        model,
        &obs_train,
        &obs_test,
        &inner_params(cfg, eps),
        &cfg.init,
        &cfg.weights_proposed(),
        TrainMode::Proposed,
        cfg.epochs,
        cfg.lr,
    )?;
    Ok(out)
}

/// Train the inverse-problem mode starting the trainable rate at `eps0`.
pub fn train_baseline_at(
    data: &PreparedData,
    cfg: &ExperimentConfig,
    eps0: f64,
) -> Result<(PinnModel, TrainRecord), PipelineError> {
    let model =
        PinnModel::with_shape(&cfg.shape, cfg.seed_init, cfg.t_end)?.with_trainable_epsilon(eps0);
    let out = pinn::train(
        model,
        &data.obs_train,
        &data.obs_test,
        &inner_params(cfg, eps0),
        &cfg.init,
        &cfg.weights_baseline(),
        TrainMode::Baseline,
        cfg.epochs,
        cfg.lr,
    )?;
    Ok(out)
}

/// Outer-loop objective of the proposed method: the minimum test error of
/// one fixed-rate training run at the candidate.
pub fn proposed_objective(
    data: &PreparedData,
    cfg: &ExperimentConfig,
    eps: f64,
) -> Result<f64, PipelineError> {
    let (_, record) = train_proposed_at(data, cfg, eps)?;
    Ok(record.min_test_error().unwrap_or(f64::INFINITY))
}

/// Outer-loop objective of the baseline: minimum test error of one
/// inverse-problem run initialized at the candidate.
pub fn baseline_objective(
    data: &PreparedData,
    cfg: &ExperimentConfig,
    eps0: f64,
) -> Result<f64, PipelineError> {
    let (_, record) = train_baseline_at(data, cfg, eps0)?;
    Ok(record.min_test_error().unwrap_or(f64::INFINITY))
}

#[derive(Debug)]
pub struct ProposedOutcome {
    pub bo: BoResult,
    /// Final model retrained at the estimated onset rate.
    pub model: PinnModel,
    pub record: TrainRecord,
}

pub fn run_proposed_experiment(cfg: &ExperimentConfig) -> Result<ProposedOutcome, PipelineError> {
    let data = prepare_data(cfg)?;
    let bo = gpbo::run_bo(
        |eps| proposed_objective(&data, cfg, eps).map_err(|e| e.to_string()),
        &cfg.bo_options(),
    )?;
    let (model, record) = train_proposed_at(&data, cfg, bo.epsilon_hat)?;
    Ok(ProposedOutcome { bo, model, record })
}

#[derive(Debug)]
pub struct BaselineOutcome {
    pub bo: BoResult,
    pub model: PinnModel,
    pub record: TrainRecord,
    /// Initial estimate from the outer loop.
    pub eps0: f64,
    /// Trainable-rate value at the minimum-test-error epoch.
    pub eps1: f64,
    /// Trainable-rate value at the minimum-training-loss epoch.
    pub eps2: f64,
}

pub fn run_baseline_experiment(cfg: &ExperimentConfig) -> Result<BaselineOutcome, PipelineError> {
    let data = prepare_data(cfg)?;
    let bo = gpbo::run_bo(
        |eps0| baseline_objective(&data, cfg, eps0).map_err(|e| e.to_string()),
        &cfg.bo_options(),
    )?;
    let eps0 = bo.epsilon_hat;
    let (model, record) = train_baseline_at(&data, cfg, eps0)?;
    let eps1 = record.epsilon_at_min_test().unwrap_or(eps0);
    let eps2 = record.epsilon_at_min_train().unwrap_or(eps0);
    Ok(BaselineOutcome { bo, model, record, eps0, eps1, eps2 })
}

/// Per-compartment RMSE of a model against the simulated truth over an even
/// grid.
pub fn rmse_vs_truth(
    model: &PinnModel,
    traj: &Trajectory,
    n_grid: usize,
) -> Result<[f64; 4], PipelineError> {
    let t_end = traj.t_end();
    let mut acc = [0.0f64; 4];
    for j in 0..n_grid {
        let t = j as f64 * t_end / (n_grid - 1) as f64;
        let truth = traj.eval_at(t)?;
        let (pred, _) = model.predict(t);
        let want = [truth.s, truth.e, truth.i, truth.r];
        for k in 0..4 {
            let d = pred[k] - want[k];
            acc[k] += d * d;
        }
    }
    Ok(acc.map(|v| (v / n_grid as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> ExperimentConfig {
        ExperimentConfig {
            epochs: 150,
            n_train: 10,
            n_test: 8,
            shape: vec![1, 8, 8, 4],
            bo_iterations: 3,
            bo_init_count: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn prepare_data_fixes_test_times_per_seed() {
        let cfg = tiny_cfg();
        let a = prepare_data(&cfg).unwrap();
        let b = prepare_data(&cfg).unwrap();
        assert_eq!(a.obs_test.times, b.obs_test.times);
        assert_eq!(a.obs_train.times[0], 0.0);
    }

    #[test]
    fn proposed_objective_is_the_training_minimum() {
        let cfg = tiny_cfg();
        let data = prepare_data(&cfg).unwrap();
        let obj = proposed_objective(&data, &cfg, 0.2).unwrap();
        let (_, record) = train_proposed_at(&data, &cfg, 0.2).unwrap();
        assert_eq!(obj, record.min_test_error().unwrap());
        assert!(obj.is_finite() && obj > 0.0);
    }

    #[test]
    fn tiny_proposed_experiment_completes() {
        let cfg = tiny_cfg();
        let out = run_proposed_experiment(&cfg).unwrap();
        assert_eq!(out.bo.evaluations.len(), 3);
        assert_eq!(out.record.len(), 150);
        assert!(out.bo.epsilon_hat >= 0.0 && out.bo.epsilon_hat <= 0.5);
    }

    #[test]
    fn tiny_baseline_experiment_reports_three_estimates() {
        let cfg = tiny_cfg();
        let out = run_baseline_experiment(&cfg).unwrap();
        assert!(out.eps0.is_finite());
        assert!(out.eps1.is_finite());
        assert!(out.eps2.is_finite());
        assert!(out.record.min_test_epoch.unwrap() < cfg.epochs);
    }

    #[test]
    fn rmse_grid_is_sound() {
        let cfg = tiny_cfg();
        let data = prepare_data(&cfg).unwrap();
        let model = PinnModel::with_shape(&[1, 8, 8, 4], 1, 200.0).unwrap();
        let rmse = rmse_vs_truth(&model, &data.traj, 201).unwrap();
        for v in rmse {
            assert!(v.is_finite() && v >= 0.0);
        }
    }
}
