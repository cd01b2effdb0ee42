//! Full-batch Adam with the conventional defaults.

use super::PinnError;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// First/second moment accumulators and the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), PinnError> {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    if let Some(k) = grads.iter().position(|g| !g.is_finite()) {
        return Err(PinnError::NumericFailure(format!(
            "non-finite gradient at parameter {k}: {}",
            grads[k]
        )));
    }
    state.t += 1;
    let bc1 = 1.0 - BETA1.powi(state.t as i32);
    let bc2 = 1.0 - BETA2.powi(state.t as i32);
    for k in 0..params.len() {
        let g = grads[k];
        state.m[k] = BETA1 * state.m[k] + (1.0 - BETA1) * g;
        state.v[k] = BETA2 * state.v[k] + (1.0 - BETA2) * g * g;
        let mhat = state.m[k] / bc1;
        let vhat = state.v[k] / bc2;
        params[k] -= lr * mhat / (vhat.sqrt() + EPS);
    }
    Ok(())
}
