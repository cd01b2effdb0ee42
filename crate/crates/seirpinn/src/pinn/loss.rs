//! The composite training loss: weighted data misfit, governing-equation
//! residuals, and the initial-condition penalty.

use crate::seir::{EpiParams, ObservationSet, SeirState};

use super::model::PinnModel;
use super::PinnError;

/// Per-compartment data weights and the three term weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// `(C_S, C_E, C_I, C_R)`.
    pub c: [f64; 4],
    pub lambda_data: f64,
    pub lambda_eq: f64,
    pub lambda_init: f64,
}

impl LossWeights {
    /// Full pseudo-data weighting used with reconstructed compartments.
    pub fn proposed() -> Self {
        Self { c: [1.0, 1.0, 1.0, 1.0], lambda_data: 1.0, lambda_eq: 1.0, lambda_init: 1.0 }
    }

    /// Partial-observation weighting: the infectious ratio only.
    pub fn baseline() -> Self {
        Self { c: [0.0, 0.0, 1.0, 0.0], lambda_data: 1.0, lambda_eq: 1.0, lambda_init: 1.0 }
    }

    pub fn validate(&self) -> Result<(), PinnError> {
        let all = [
            self.c[0], self.c[1], self.c[2], self.c[3],
            self.lambda_data, self.lambda_eq, self.lambda_init,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(PinnError::Config("loss weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Data targets per compartment; `None` where no observation exists.
fn targets_at(obs: &ObservationSet, idx: usize) -> [Option<f64>; 4] {
    [
        obs.pseudo_s.as_ref().map(|v| v[idx]),
        obs.pseudo_e.as_ref().map(|v| v[idx]),
        Some(obs.i_obs[idx]),
        obs.pseudo_r.as_ref().map(|v| v[idx]),
    ]
}

const COMPARTMENTS: [&str; 4] = ["S", "E", "I", "R"];

/// Weighted mean squared data misfit over the observation points.
pub fn loss_data(model: &PinnModel, obs: &ObservationSet, w: &LossWeights) -> Result<f64, PinnError> {
    loss_data_with(&|t| model.predict(t).0, obs, w)
}

/// Same, but over any predictor; used to inject oracles in tests.
pub fn loss_data_with(
    predict: &dyn Fn(f64) -> [f64; 4],
    obs: &ObservationSet,
    w: &LossWeights,
) -> Result<f64, PinnError> {
    w.validate()?;
    obs.validate().map_err(|e| PinnError::Config(e.to_string()))?;
    if obs.is_empty() {
        return Err(PinnError::Config("empty observation set".into()));
    }
    for (k, name) in COMPARTMENTS.iter().enumerate() {
        if w.c[k] > 0.0 && targets_at(obs, 0)[k].is_none() {
            return Err(PinnError::Config(format!(
                "C_{name} > 0 but no {name} observations are present"
            )));
        }
    }
    let n = obs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let pred = predict(obs.times[i]);
        let tgt = targets_at(obs, i);
        for k in 0..4 {
            if w.c[k] > 0.0 {
                let d = tgt[k].unwrap() - pred[k];
                acc += w.c[k] * d * d;
            }
        }
    }
    Ok(acc / n as f64)
}

/// Mean over collocation times of the five squared SEIR residuals.
///
/// A trainable onset rate on the model takes precedence over
/// `params.epsilon`.
pub fn loss_eq(model: &PinnModel, times: &[f64], params: &EpiParams) -> f64 {
    let eps = model.epsilon().unwrap_or(params.epsilon);
    loss_eq_with(&|t| model.predict(t), times, params.beta, eps, params.gamma)
}

pub fn loss_eq_with(
    predict: &dyn Fn(f64) -> ([f64; 4], [f64; 4]),
    times: &[f64],
    beta: f64,
    epsilon: f64,
    gamma: f64,
) -> f64 {
    let mut acc = 0.0;
    for &t in times {
        let ([s, e, i, r], [ds, de, di, dr]) = predict(t);
        let infection = beta * s * i;
        let r1 = ds + infection;
        let r2 = de - (infection - epsilon * e);
        let r3 = di - (epsilon * e - gamma * i);
        let r4 = dr - gamma * i;
        let r5 = s + e + i + r - 1.0;
        acc += r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4 + r5 * r5;
    }
    acc / times.len() as f64
}

/// Mean squared error of the four outputs at `t = 0` against the known
/// initial state.
pub fn loss_init(model: &PinnModel, init: &SeirState) -> f64 {
    loss_init_with(&|t| model.predict(t).0, init)
}

pub fn loss_init_with(predict: &dyn Fn(f64) -> [f64; 4], init: &SeirState) -> f64 {
    let pred = predict(0.0);
    let want = [init.s, init.e, init.i, init.r];
    let mut acc = 0.0;
    for k in 0..4 {
        let d = pred[k] - want[k];
        acc += d * d;
    }
    acc / 4.0
}

/// `lambda_data * L_data + lambda_eq * L_eq + lambda_init * L_init`, with
/// the observation times doubling as collocation times.
pub fn total_loss(
    model: &PinnModel,
    obs: &ObservationSet,
    params: &EpiParams,
    init: &SeirState,
    w: &LossWeights,
) -> Result<f64, PinnError> {
    let mut total = 0.0;
    if w.lambda_data > 0.0 {
        total += w.lambda_data * loss_data(model, obs, w)?;
    } else {
        w.validate()?;
    }
    if w.lambda_eq > 0.0 {
        total += w.lambda_eq * loss_eq(model, &obs.times, params);
    }
    if w.lambda_init > 0.0 {
        total += w.lambda_init * loss_init(model, init);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seir::{self, SampleMode};

    fn toy_model() -> PinnModel {
        PinnModel::with_shape(&[1, 8, 8, 4], 21, 200.0).unwrap()
    }

    fn toy_obs(model: &PinnModel, times: Vec<f64>) -> ObservationSet {
        // Observations generated from the model itself: zero residual.
        let n = times.len();
        let mut obs = ObservationSet {
            times,
            i_obs: vec![0.0; n],
            i_dot: vec![0.0; n],
            i_ddot: vec![0.0; n],
            pseudo_s: Some(vec![0.0; n]),
            pseudo_e: Some(vec![0.0; n]),
            pseudo_r: Some(vec![0.0; n]),
        };
        for k in 0..n {
            let (v, d) = model.predict(obs.times[k]);
            obs.pseudo_s.as_mut().unwrap()[k] = v[0];
            obs.pseudo_e.as_mut().unwrap()[k] = v[1];
            obs.i_obs[k] = v[2];
            obs.pseudo_r.as_mut().unwrap()[k] = v[3];
            obs.i_dot[k] = d[2];
        }
        obs
    }

    #[test]
    fn perfect_model_has_zero_data_loss() {
        let m = toy_model();
        let obs = toy_obs(&m, vec![0.0, 50.0, 100.0, 150.0, 200.0]);
        let l = loss_data(&m, &obs, &LossWeights::proposed()).unwrap();
        assert!(l <= 1e-12, "got {l}");
    }

    #[test]
    fn i_only_weights_reduce_to_plain_mse() {
        let m = toy_model();
        let mut obs = toy_obs(&m, vec![0.0, 60.0, 120.0, 180.0]);
        // Perturb the I observations so the loss is nonzero.
        for v in obs.i_obs.iter_mut() {
            *v += 0.01;
        }
        let l = loss_data(&m, &obs, &LossWeights::baseline()).unwrap();
        let mut mse = 0.0;
        for k in 0..obs.len() {
            let d = obs.i_obs[k] - m.predict(obs.times[k]).0[2];
            mse += d * d;
        }
        mse /= obs.len() as f64;
        assert!((l - mse).abs() <= 1e-15);
    }

    #[test]
    fn data_loss_is_linear_in_weights() {
        let m = toy_model();
        let mut obs = toy_obs(&m, vec![10.0, 90.0, 170.0]);
        for v in obs.i_obs.iter_mut() {
            *v += 0.02;
        }
        for v in obs.pseudo_e.as_mut().unwrap().iter_mut() {
            *v -= 0.01;
        }
        let mut w = LossWeights::proposed();
        w.c = [0.0, 1.0, 1.0, 0.0];
        let base = loss_data(&m, &obs, &w).unwrap();
        let mut w2 = w;
        w2.c[2] = 2.0;
        let doubled = loss_data(&m, &obs, &w2).unwrap();
        let mut wi = w;
        wi.c = [0.0, 0.0, 1.0, 0.0];
        let i_part = loss_data(&m, &obs, &wi).unwrap();
        assert!((doubled - (base + i_part)).abs() <= 1e-15);
    }

    #[test]
    fn missing_pseudo_data_is_a_config_error() {
        let m = toy_model();
        let mut obs = toy_obs(&m, vec![0.0, 100.0]);
        obs.pseudo_s = None;
        let err = loss_data(&m, &obs, &LossWeights::proposed());
        assert!(matches!(err, Err(PinnError::Config(_))));
    }

    #[test]
    fn malformed_observation_sets_are_config_errors() {
        let m = toy_model();
        let empty = ObservationSet {
            times: vec![],
            i_obs: vec![],
            i_dot: vec![],
            i_ddot: vec![],
            pseudo_s: None,
            pseudo_e: None,
            pseudo_r: None,
        };
        assert!(matches!(
            loss_data(&m, &empty, &LossWeights::baseline()),
            Err(PinnError::Config(_))
        ));
        let mut ragged = toy_obs(&m, vec![0.0, 50.0, 100.0]);
        ragged.i_obs.pop();
        assert!(matches!(
            loss_data(&m, &ragged, &LossWeights::baseline()),
            Err(PinnError::Config(_))
        ));
    }

    #[test]
    fn equation_loss_vanishes_on_simulator_output() {
        let params = seir::default_params();
        let traj = seir::simulate(&params, &seir::default_init(), 200.0, 0.2).unwrap();
        let obs = seir::sample_observations(&traj, &params, 25, SampleMode::Train, 0).unwrap();
        let predict = |t: f64| {
            let st = traj.eval_at(t).unwrap();
            let inf = params.beta * st.s * st.i;
            let de = inf - params.epsilon * st.e;
            let di = params.epsilon * st.e - params.gamma * st.i;
            ([st.s, st.e, st.i, st.r], [-inf, de, di, params.gamma * st.i])
        };
        let l = loss_eq_with(&predict, &obs.times, params.beta, params.epsilon, params.gamma);
        assert!(l <= 1e-8, "residual on ground truth: {l}");
    }

    #[test]
    fn equation_loss_at_disease_free_fixed_point_is_zero() {
        let predict = |_t: f64| ([1.0, 0.0, 0.0, 0.0], [0.0; 4]);
        let l = loss_eq_with(&predict, &[0.0, 5.0, 10.0], 0.26, 0.2, 0.1);
        assert_eq!(l, 0.0);
    }

    #[test]
    fn conservation_violation_contributes_its_square() {
        let c = 0.037;
        let predict = move |_t: f64| ([1.0 + c, 0.0, 0.0, 0.0], [0.0; 4]);
        // S' residual: beta*(1+c)*0 = 0; only the conservation term fires.
        let l = loss_eq_with(&predict, &[1.0, 2.0], 0.26, 0.2, 0.1);
        assert!((l - c * c).abs() <= 1e-15);
    }

    #[test]
    fn init_loss_hand_value() {
        let predict = |_t: f64| [0.0, 0.0, 0.0, 0.0];
        let init = seir::default_init();
        let l = loss_init_with(&predict, &init);
        assert!((l - 0.24505).abs() <= 1e-15);
    }

    #[test]
    fn init_loss_is_quadratic_in_the_error() {
        let init = seir::default_init();
        for k in [0.5, 2.0, 3.0] {
            let base = loss_init_with(&|_| [0.0; 4], &init);
            let scaled = loss_init_with(
                &move |_| {
                    [
                        init.s - k * init.s,
                        init.e - k * init.e,
                        init.i - k * init.i,
                        init.r - k * init.r,
                    ]
                },
                &init,
            );
            assert!((scaled - k * k * base).abs() <= 1e-12);
        }
    }

    #[test]
    fn total_loss_selects_terms() {
        let m = toy_model();
        let obs = toy_obs(&m, vec![0.0, 100.0, 200.0]);
        let params = seir::default_params();
        let init = seir::default_init();

        let mut w = LossWeights::proposed();
        w.lambda_data = 0.0;
        w.lambda_eq = 0.0;
        w.lambda_init = 0.0;
        assert_eq!(total_loss(&m, &obs, &params, &init, &w).unwrap(), 0.0);

        let mut w = LossWeights::proposed();
        w.lambda_eq = 0.0;
        w.lambda_init = 0.0;
        let t = total_loss(&m, &obs, &params, &init, &w).unwrap();
        let d = loss_data(&m, &obs, &w).unwrap();
        assert_eq!(t, d);
    }

    #[test]
    fn total_loss_on_injected_ground_truth_is_tiny() {
        let params = seir::default_params();
        let init = seir::default_init();
        let traj = seir::simulate(&params, &init, 200.0, 0.2).unwrap();
        let mut obs = seir::sample_observations(&traj, &params, 50, SampleMode::Train, 0).unwrap();
        let n = obs.len();
        let mut ps = vec![0.0; n];
        let mut pe = vec![0.0; n];
        let mut pr = vec![0.0; n];
        for k in 0..n {
            let st = traj.eval_at(obs.times[k]).unwrap();
            ps[k] = st.s;
            pe[k] = st.e;
            pr[k] = st.r;
        }
        obs.pseudo_s = Some(ps);
        obs.pseudo_e = Some(pe);
        obs.pseudo_r = Some(pr);

        let predict_vals = |t: f64| {
            let st = traj.eval_at(t).unwrap();
            [st.s, st.e, st.i, st.r]
        };
        let w = LossWeights::proposed();
        let l_data = loss_data_with(&predict_vals, &obs, &w).unwrap();
        let predict_full = |t: f64| {
            let st = traj.eval_at(t).unwrap();
            let inf = params.beta * st.s * st.i;
            (
                [st.s, st.e, st.i, st.r],
                [
                    -inf,
                    inf - params.epsilon * st.e,
                    params.epsilon * st.e - params.gamma * st.i,
                    params.gamma * st.i,
                ],
            )
        };
        let l_eq = loss_eq_with(&predict_full, &obs.times, params.beta, params.epsilon, params.gamma);
        let l_init = loss_init_with(&predict_vals, &init);
        let total = l_data + l_eq + l_init;
        assert!(total <= 1e-8, "ground-truth injection total {total}");
    }
}
