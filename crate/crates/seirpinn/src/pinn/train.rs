//! Full-batch training for both learning modes.
//!
//! Proposed mode fixes the onset rate and fits full pseudo-data; baseline
//! mode trains the onset rate jointly with the weights from `I`-only data.
//! Each epoch evaluates one per-point loss program over the training times
//! (data + equation terms share the forward pass) plus an initial-condition
//! program, accumulating gradients in a fixed point order.

use crate::diffkit::{Dual, NodeId, Tape, TapeBuilder};
use crate::seir::{EpiParams, ObservationSet, SeirState};

use super::adam::{adam_step, AdamState};
use super::loss::{loss_data, loss_eq, LossWeights};
use super::model::PinnModel;
use super::PinnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Fixed onset rate, full pseudo-data fit.
    Proposed,
    /// Trainable onset rate, `I`-only data fit.
    Baseline,
}

/// Per-epoch history plus the argmin bookkeeping used to extract the
/// baseline estimates.
#[derive(Debug, Clone, Default)]
pub struct TrainRecord {
    pub train_loss: Vec<f64>,
    pub test_error: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub min_test_epoch: Option<usize>,
    pub min_train_epoch: Option<usize>,
    min_test_params: Option<Vec<f64>>,
    min_train_params: Option<Vec<f64>>,
}

impl TrainRecord {
    pub fn len(&self) -> usize {
        self.train_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_loss.is_empty()
    }

    pub fn min_test_error(&self) -> Option<f64> {
        self.min_test_epoch.map(|e| self.test_error[e])
    }

    pub fn min_train_loss(&self) -> Option<f64> {
        self.min_train_epoch.map(|e| self.train_loss[e])
    }

    /// Onset-rate estimate at the epoch of minimum test error.
    pub fn epsilon_at_min_test(&self) -> Option<f64> {
        self.min_test_epoch.map(|e| self.epsilon[e])
    }

    /// Onset-rate estimate at the epoch of minimum training loss.
    pub fn epsilon_at_min_train(&self) -> Option<f64> {
        self.min_train_epoch.map(|e| self.epsilon[e])
    }

    /// Parameter snapshot taken at the minimum-test-error epoch.
    pub fn min_test_params(&self) -> Option<&[f64]> {
        self.min_test_params.as_deref()
    }

    pub fn min_train_params(&self) -> Option<&[f64]> {
        self.min_train_params.as_deref()
    }
}

/// How the equation residuals obtain the onset rate.
enum EpsSource {
    Fixed(f64),
    Trainable(usize),
}

/// Per-point program: `lambda_data * sum_k C_k (x_k - d_k)^2 + lambda_eq *
/// sum residual^2` at one collocation/observation time.
///
/// Input slots: 0 = normalized time dual, 1 = active data targets.
fn build_point_tape(
    model: &PinnModel,
    w: &LossWeights,
    beta: f64,
    gamma: f64,
    eps: &EpsSource,
) -> Result<Tape, PinnError> {
    let mut b = TapeBuilder::new(model.param_count());
    let t_in = b.input(1);
    let active: Vec<usize> = (0..4).filter(|&k| w.c[k] > 0.0 && w.lambda_data > 0.0).collect();
    let targets = b.input(active.len());
    let out = network(&mut b, model, t_in)?;

    let mut terms: Vec<NodeId> = Vec::new();
    if !active.is_empty() {
        let mut data_terms = Vec::new();
        for (j, &k) in active.iter().enumerate() {
            let pred = b.value_at(out, k)?;
            let tgt = b.value_at(targets, j)?;
            let diff = b.sub(pred, tgt)?;
            let sq = b.square(diff);
            data_terms.push(b.scale(w.c[k], sq));
        }
        let data = b.sum(data_terms)?;
        terms.push(b.scale(w.lambda_data, data));
    }
    if w.lambda_eq > 0.0 {
        let s_v = b.value_at(out, 0)?;
        let e_v = b.value_at(out, 1)?;
        let i_v = b.value_at(out, 2)?;
        let r_v = b.value_at(out, 3)?;
        let s_d = b.deriv_at(out, 0)?;
        let e_d = b.deriv_at(out, 1)?;
        let i_d = b.deriv_at(out, 2)?;
        let r_d = b.deriv_at(out, 3)?;
        let eps_node = match eps {
            EpsSource::Fixed(v) => b.scalar_const(*v),
            EpsSource::Trainable(idx) => b.param(*idx)?,
        };
        let si = b.mul(s_v, i_v)?;
        let infection = b.scale(beta, si);
        let eps_e = b.mul(eps_node, e_v)?;
        let gamma_i = b.scale(gamma, i_v);

        let r1 = b.add(s_d, infection)?;
        let onset_balance = b.sub(infection, eps_e)?;
        let r2 = b.sub(e_d, onset_balance)?;
        let removal_balance = b.sub(eps_e, gamma_i)?;
        let r3 = b.sub(i_d, removal_balance)?;
        let r4 = b.sub(r_d, gamma_i)?;
        let total = b.sum(vec![s_v, e_v, i_v, r_v])?;
        let r5 = b.offset(-1.0, total);

        let sq: Vec<NodeId> = [r1, r2, r3, r4, r5].into_iter().map(|r| b.square(r)).collect();
        let eq = b.sum(sq)?;
        terms.push(b.scale(w.lambda_eq, eq));
    }
    let output = match terms.len() {
        0 => b.scalar_const(0.0),
        1 => terms[0],
        _ => b.sum(terms)?,
    };
    Ok(b.finish(output)?)
}

/// Initial-condition program: mean squared error of the outputs at `t = 0`
/// against the known initial state (unweighted; the term weight rides in on
/// the backward seed).
fn build_init_tape(model: &PinnModel, init: &SeirState) -> Result<Tape, PinnError> {
    let mut b = TapeBuilder::new(model.param_count());
    let t_in = b.input(1);
    let out = network(&mut b, model, t_in)?;
    let want = [init.s, init.e, init.i, init.r];
    let mut sq = Vec::new();
    for k in 0..4 {
        let pred = b.value_at(out, k)?;
        let diff = b.offset(-want[k], pred);
        sq.push(b.square(diff));
    }
    let total = b.sum(sq)?;
    let output = b.scale(0.25, total);
    Ok(b.finish(output)?)
}

fn network(b: &mut TapeBuilder, model: &PinnModel, input: NodeId) -> Result<NodeId, PinnError> {
    let mut cur = input;
    let n_layers = model.layers().len();
    for (li, layer) in model.layers().iter().enumerate() {
        let aff = b.affine(cur, layer.w, layer.b, layer.rows, layer.cols)?;
        cur = if li + 1 < n_layers { b.tanh(aff) } else { aff };
    }
    Ok(cur)
}

fn active_compartments(w: &LossWeights) -> Vec<usize> {
    (0..4).filter(|&k| w.c[k] > 0.0 && w.lambda_data > 0.0).collect()
}

fn target_column(obs: &ObservationSet, k: usize) -> Option<&[f64]> {
    match k {
        0 => obs.pseudo_s.as_deref(),
        1 => obs.pseudo_e.as_deref(),
        2 => Some(&obs.i_obs),
        3 => obs.pseudo_r.as_deref(),
        _ => unreachable!(),
    }
}

/// Exact value and gradient of the composite loss at the model's current
/// parameters; the reference entry point for finite-difference checks.
pub fn total_loss_gradient(
    model: &PinnModel,
    obs: &ObservationSet,
    params: &EpiParams,
    init: &SeirState,
    w: &LossWeights,
) -> Result<(f64, Vec<f64>), PinnError> {
    w.validate()?;
    let eps = match model.epsilon_index() {
        Some(idx) => EpsSource::Trainable(idx),
        None => EpsSource::Fixed(params.epsilon),
    };
    let point_tape = build_point_tape(model, w, params.beta, params.gamma, &eps)?;
    let init_tape = build_init_tape(model, init)?;
    let mut ws_point = point_tape.workspace();
    let mut ws_init = init_tape.workspace();
    let mut grad = vec![0.0; model.param_count()];

    let active = active_compartments(w);
    let n = obs.len();
    let inv_n = 1.0 / n as f64;
    let mut targets = vec![Dual::default(); active.len()];
    let mut acc = 0.0;
    for i in 0..n {
        for (j, &k) in active.iter().enumerate() {
            let col = target_column(obs, k).ok_or_else(|| {
                PinnError::Config(format!("C weight {k} set but observations are missing"))
            })?;
            targets[j] = Dual::constant(col[i]);
        }
        let time = [Dual::variable(obs.times[i] / model.time_scale(), 1.0 / model.time_scale())];
        acc += point_tape.accumulate_gradient(
            &mut ws_point,
            model.params(),
            &[&time, &targets],
            inv_n,
            &mut grad,
        )?;
    }
    let mut total = acc * inv_n;
    if w.lambda_init > 0.0 {
        let time = [Dual::variable(0.0, 1.0 / model.time_scale())];
        let init_v = init_tape.accumulate_gradient(
            &mut ws_init,
            model.params(),
            &[&time],
            w.lambda_init,
            &mut grad,
        )?;
        total += w.lambda_init * init_v;
    }
    Ok((total, grad))
}

/// Held-out error: the data misfit plus the equation residuals, both
/// evaluated at the test points with their term weights. The residual part
/// is what keeps the metric discriminating between onset-rate candidates
/// once the network is expressive enough to fit any smooth pseudo-data.
fn test_error(
    model: &PinnModel,
    obs_test: &ObservationSet,
    params: &EpiParams,
    w: &LossWeights,
) -> Result<f64, PinnError> {
    let mut err = 0.0;
    if w.lambda_data > 0.0 {
        err += w.lambda_data * loss_data(model, obs_test, w)?;
    }
    if w.lambda_eq > 0.0 {
        err += w.lambda_eq * loss_eq(model, &obs_test.times, params);
    }
    Ok(err)
}

/// Train for `epochs` full-batch Adam iterations.
///
/// The record holds one row per epoch, measured at the parameters the epoch
/// started from; a numeric failure aborts with the rows collected so far.
#[allow(clippy::too_many_arguments)]
pub fn train(
    mut model: PinnModel,
    obs_train: &ObservationSet,
    obs_test: &ObservationSet,
    params: &EpiParams,
    init: &SeirState,
    w: &LossWeights,
    mode: TrainMode,
    epochs: usize,
    lr: f64,
) -> Result<(PinnModel, TrainRecord), PinnError> {
    w.validate()?;
    params.validate().map_err(|e| PinnError::Config(e.to_string()))?;
    match mode {
        TrainMode::Proposed => {
            if model.epsilon().is_some() {
                return Err(PinnError::Config(
                    "proposed mode trains with a fixed onset rate; drop the trainable epsilon".into(),
                ));
            }
        }
        TrainMode::Baseline => {
            if model.epsilon().is_none() {
                return Err(PinnError::Config(
                    "baseline mode needs a trainable onset rate on the model".into(),
                ));
            }
            if w.c != [0.0, 0.0, 1.0, 0.0] {
                return Err(PinnError::Config(
                    "baseline mode fits I only: C must be (0, 0, 1, 0)".into(),
                ));
            }
        }
    }
    let active = active_compartments(w);
    for set in [obs_train, obs_test] {
        set.validate().map_err(|e| PinnError::Config(e.to_string()))?;
        if set.is_empty() {
            return Err(PinnError::Config("empty observation set".into()));
        }
        for &k in &active {
            if target_column(set, k).is_none() {
                return Err(PinnError::Config(format!(
                    "C weight for compartment {k} set but observations are missing"
                )));
            }
        }
    }

    let eps = match model.epsilon_index() {
        Some(idx) => EpsSource::Trainable(idx),
        None => EpsSource::Fixed(params.epsilon),
    };
    let point_tape = build_point_tape(&model, w, params.beta, params.gamma, &eps)?;
    let init_tape = build_init_tape(&model, init)?;
    let mut ws_point = point_tape.workspace();
    let mut ws_init = init_tape.workspace();

    let n = obs_train.len();
    let inv_n = 1.0 / n as f64;
    let inv_scale = 1.0 / model.time_scale();
    let mut grad = vec![0.0; model.param_count()];
    let mut targets = vec![Dual::default(); active.len()];
    let mut adam = AdamState::new(model.param_count());
    let mut record = TrainRecord::default();
    let mut best_test = f64::INFINITY;
    let mut best_train = f64::INFINITY;

    for epoch in 0..epochs {
        grad.fill(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            for (j, &k) in active.iter().enumerate() {
                targets[j] = Dual::constant(target_column(obs_train, k).unwrap()[i]);
            }
            let time = [Dual::variable(obs_train.times[i] * inv_scale, inv_scale)];
            let v = point_tape
                .accumulate_gradient(&mut ws_point, model.params(), &[&time, &targets], inv_n, &mut grad)
                .map_err(|e| PinnError::Aborted {
                    epoch,
                    reason: e.to_string(),
                    record: Box::new(record.clone()),
                })?;
            acc += v;
        }
        let mut train_loss = acc * inv_n;
        if w.lambda_init > 0.0 {
            let time = [Dual::variable(0.0, inv_scale)];
            let init_v = init_tape
                .accumulate_gradient(&mut ws_init, model.params(), &[&time], w.lambda_init, &mut grad)
                .map_err(|e| PinnError::Aborted {
                    epoch,
                    reason: e.to_string(),
                    record: Box::new(record.clone()),
                })?;
            train_loss += w.lambda_init * init_v;
        }
        let test_err = test_error(&model, obs_test, params, w)?;
        let eps_now = model.epsilon().unwrap_or(params.epsilon);

        record.train_loss.push(train_loss);
        record.test_error.push(test_err);
        record.epsilon.push(eps_now);
        if test_err < best_test {
            best_test = test_err;
            record.min_test_epoch = Some(epoch);
            record.min_test_params = Some(model.params().to_vec());
        }
        if train_loss < best_train {
            best_train = train_loss;
            record.min_train_epoch = Some(epoch);
            record.min_train_params = Some(model.params().to_vec());
        }

        adam_step(model.params_mut(), &grad, &mut adam, lr).map_err(|e| PinnError::Aborted {
            epoch,
            reason: e.to_string(),
            record: Box::new(record.clone()),
        })?;
    }
    Ok((model, record))
}
