//! Finite-difference verification of every loss gradient on the test-scale
//! architecture, including the trainable onset rate and the paths through
//! the network's time derivative.

use seirpinn::pinn::{self, LossWeights, PinnModel, TrainMode};
use seirpinn::recon::{reconstruct, ReconConfig};
use seirpinn::rng::SplitMix64;
use seirpinn::seir::{self, ObservationSet, SampleMode};

const REL_TOL: f64 = 1e-5;
const ABS_FLOOR: f64 = 1e-8;
const FD_H: f64 = 1e-5;

fn observations(n: usize, with_pseudo: bool) -> ObservationSet {
    let p = seir::default_params();
    let traj = seir::simulate(&p, &seir::default_init(), 200.0, 0.2).unwrap();
    let obs = seir::sample_observations(&traj, &p, n, SampleMode::Train, 0).unwrap();
    if with_pseudo {
        reconstruct(&obs, &ReconConfig::new(p.epsilon, p.beta, p.gamma)).unwrap()
    } else {
        obs
    }
}

/// Unit-scale random weights instead of Glorot, per the check's charter.
fn random_model(seed: u64, trainable_eps: Option<f64>) -> PinnModel {
    let mut model = PinnModel::with_shape(&[1, 8, 8, 8, 4], seed, 200.0).unwrap();
    let mut rng = SplitMix64::new(seed ^ 0xabcdef);
    for w in model.params_mut() {
        *w = rng.uniform(-1.0, 1.0);
    }
    match trainable_eps {
        Some(e) => model.with_trainable_epsilon(e),
        None => model,
    }
}

fn check_gradient(model: &PinnModel, obs: &ObservationSet, w: &LossWeights) {
    let params = seir::default_params();
    let init = seir::default_init();
    let (_, grad) = pinn::total_loss_gradient(model, obs, &params, &init, w).unwrap();
    let mut probe = model.clone();
    let mut max_rel = 0.0f64;
    for k in 0..model.param_count() {
        let orig = model.params()[k];
        probe.params_mut()[k] = orig + FD_H;
        let up = pinn::total_loss(&probe, obs, &params, &init, w).unwrap();
        probe.params_mut()[k] = orig - FD_H;
        let dn = pinn::total_loss(&probe, obs, &params, &init, w).unwrap();
        probe.params_mut()[k] = orig;
        let fd = (up - dn) / (2.0 * FD_H);
        let err = (grad[k] - fd).abs();
        let tol = ABS_FLOOR.max(REL_TOL * fd.abs());
        assert!(err <= tol, "param {k}: ad {} vs fd {fd} (err {err:e})", grad[k]);
        // The relative criterion only binds where it exceeds the floor.
        if REL_TOL * fd.abs() > ABS_FLOOR {
            max_rel = max_rel.max(err / fd.abs());
        }
    }
    assert!(max_rel <= REL_TOL, "max relative error {max_rel:e}");
}

#[test]
fn proposed_mode_gradient_full_sweep() {
    let obs = observations(10, true);
    for seed in [1, 2, 3] {
        check_gradient(&random_model(seed, None), &obs, &LossWeights::proposed());
    }
}

#[test]
fn baseline_mode_gradient_full_sweep_including_epsilon() {
    let obs = observations(10, false);
    for (seed, eps0) in [(4, 0.13), (5, 0.31)] {
        let model = random_model(seed, Some(eps0));
        check_gradient(&model, &obs, &LossWeights::baseline());
    }
}

#[test]
fn equation_only_gradient_exercises_derivative_paths() {
    // lambda_data = 0 isolates the residual terms, whose gradients flow
    // entirely through the mixed weight-and-time derivatives.
    let obs = observations(8, false);
    let mut w = LossWeights::baseline();
    w.lambda_data = 0.0;
    w.lambda_init = 0.0;
    check_gradient(&random_model(6, None), &obs, &w);
}

#[test]
fn epsilon_partial_matches_finite_difference() {
    let obs = observations(10, false);
    let params = seir::default_params();
    let init = seir::default_init();
    let w = LossWeights::baseline();
    let model = random_model(7, Some(0.22));
    let idx = model.param_count() - 1;
    let (_, grad) = pinn::total_loss_gradient(&model, &obs, &params, &init, &w).unwrap();
    let mut probe = model.clone();
    probe.params_mut()[idx] = 0.22 + FD_H;
    let up = pinn::total_loss(&probe, &obs, &params, &init, &w).unwrap();
    probe.params_mut()[idx] = 0.22 - FD_H;
    let dn = pinn::total_loss(&probe, &obs, &params, &init, &w).unwrap();
    let fd = (up - dn) / (2.0 * FD_H);
    assert!(fd.abs() > 1e-8, "epsilon must influence the loss");
    assert!((grad[idx] - fd).abs() <= ABS_FLOOR.max(REL_TOL * fd.abs()));
}

#[test]
fn spot_check_along_a_training_run() {
    // The gradient stays consistent with finite differences as training
    // progresses, checked every 1000 epochs on a small setup.
    let p = seir::default_params();
    let init = seir::default_init();
    let traj = seir::simulate(&p, &init, 200.0, 0.2).unwrap();
    let obs_train = reconstruct(
        &seir::sample_observations(&traj, &p, 10, SampleMode::Train, 0).unwrap(),
        &ReconConfig::new(p.epsilon, p.beta, p.gamma),
    )
    .unwrap();
    let obs_test = reconstruct(
        &seir::sample_observations(&traj, &p, 8, SampleMode::Test, 9).unwrap(),
        &ReconConfig::new(p.epsilon, p.beta, p.gamma),
    )
    .unwrap();
    let w = LossWeights::proposed();
    let mut model = PinnModel::with_shape(&[1, 8, 8, 8, 4], 11, 200.0).unwrap();
    for _chunk in 0..3 {
        check_gradient(&model, &obs_train, &w);
        let (next, _) = pinn::train(
            model,
            &obs_train,
            &obs_test,
            &p,
            &init,
            &w,
            TrainMode::Proposed,
            1000,
            1e-3,
        )
        .unwrap();
        model = next;
    }
    check_gradient(&model, &obs_train, &w);
}
