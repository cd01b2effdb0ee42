//! SEIR ground truth: fixed-step Dormand-Prince integration with dense
//! output, analytic first and second derivatives of the infectious ratio,
//! and train/test observation sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

/// Tolerance for the per-compartment `[0, 1]` bound; roundoff near 0 must
/// not abort a run.
pub const COMPARTMENT_SLACK: f64 = 1e-6;
/// Conservation budget `|S+E+I+R - 1|` enforced at every accepted step.
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration failed at step {step} (t = {t}): {reason}")]
    IntegrationFailure { step: usize, t: f64, reason: String },
    #[error("time {t} outside the trajectory domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
}

/// Infection, onset, and removal rates `(beta, epsilon, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpiParams {
    pub beta: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl EpiParams {
    pub fn new(beta: f64, epsilon: f64, gamma: f64) -> Result<Self, SimError> {
        let p = Self { beta, epsilon, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.beta.is_finite() && self.epsilon.is_finite() && self.gamma.is_finite()) {
            return Err(SimError::InvalidParams("rates must be finite".into()));
        }
        if self.beta <= 0.0 || self.gamma <= 0.0 {
            return Err(SimError::InvalidParams(format!(
                "beta and gamma must be positive (got beta = {}, gamma = {})",
                self.beta, self.gamma
            )));
        }
        if self.epsilon < 0.0 {
            return Err(SimError::InvalidParams(format!(
                "epsilon must be non-negative (got {})",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Population ratios of the four compartments at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeirState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

impl SeirState {
    pub fn new(s: f64, e: f64, i: f64, r: f64) -> Result<Self, SimError> {
        let st = Self { s, e, i, r };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [("S", self.s), ("E", self.e), ("I", self.i), ("R", self.r)] {
            if !v.is_finite() {
                return Err(SimError::InvalidState(format!("{name} is not finite")));
            }
            if !(-COMPARTMENT_SLACK..=1.0 + COMPARTMENT_SLACK).contains(&v) {
                return Err(SimError::InvalidState(format!(
                    "{name} = {v} outside [-{COMPARTMENT_SLACK}, 1+{COMPARTMENT_SLACK}]"
                )));
            }
        }
        let drift = (self.sum() - 1.0).abs();
        if drift > CONSERVATION_TOL {
            return Err(SimError::InvalidState(format!(
                "S+E+I+R deviates from 1 by {drift:e}"
            )));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }

    fn as_array(&self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self { s: y[0], e: y[1], i: y[2], r: y[3] }
    }
}

/// Right-hand side of the SEIR system.
fn rhs(p: &EpiParams, y: [f64; 4]) -> [f64; 4] {
    let [s, e, i, _] = y;
    let inf = p.beta * s * i;
    [-inf, inf - p.epsilon * e, p.epsilon * e - p.gamma * i, p.gamma * i]
}

/// Per-step coefficients of the degree-5 interpolant.
type DenseSeg = [[f64; 4]; 5];

/// Grid states plus the dense-output data of every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SeirState>,
    dense: Vec<DenseSeg>,
    max_embedded_err: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SeirState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Largest embedded 5(4) error estimate seen during integration; a
    /// step-size diagnostic, not part of the solution.
    pub fn max_embedded_err(&self) -> f64 {
        self.max_embedded_err
    }

    /// Dense-output evaluation; exact at grid points.
    pub fn eval_at(&self, t: f64) -> Result<SeirState, SimError> {
        eval_at(self, t)
    }
}

// Dormand-Prince 5(4) tableau (b2 = 0 column omitted where it vanishes).
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - bhat, for the embedded 4th-order error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights of the 5th stage coefficient.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: [f64; 4], h: f64, terms: &[(f64, [f64; 4])]) -> [f64; 4] {
    let mut out = y;
    for (c, k) in terms {
        for j in 0..4 {
            out[j] += h * c * k[j];
        }
    }
    out
}

/// Integrate the SEIR system on `[0, t_end]` with fixed step `dt`.
///
/// Grid times are `i * t_end / n` so that decimal grid points are hit
/// exactly; `dt` must divide `t_end`. The 5th-order solution propagates,
/// the embedded 4th-order difference is kept only as a diagnostic.
pub fn simulate(
    params: &EpiParams,
    init: &SeirState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, SimError> {
    params.validate()?;
    init.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::InvalidInput(format!("dt must be positive (got {dt})")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(SimError::InvalidInput(format!("t_end must be positive (got {t_end})")));
    }
    let steps_f = t_end / dt;
    let n = steps_f.round();
    if n < 1.0 || (steps_f - n).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(SimError::InvalidInput(format!(
            "dt = {dt} does not evenly divide t_end = {t_end}"
        )));
    }
    let n = n as usize;

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut dense = Vec::with_capacity(n);
    for i in 0..=n {
        times.push(i as f64 * t_end / n as f64);
    }

    let mut y = init.as_array();
    states.push(*init);
    let mut k1 = rhs(params, y); // FSAL: k7 of each step seeds the next k1
    let mut max_err: f64 = 0.0;

    for step in 0..n {
        let h = times[step + 1] - times[step];
        let k2 = rhs(params, axpy(y, h, &[(A21, k1)]));
        let k3 = rhs(params, axpy(y, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(params, axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(params, axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = rhs(
            params,
            axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let y1 = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = rhs(params, y1);

        for j in 0..4 {
            let err = h
                * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
            max_err = max_err.max(err.abs());
        }

        let mut seg: DenseSeg = [[0.0; 4]; 5];
        for j in 0..4 {
            let ydiff = y1[j] - y[j];
            let bspl = h * k1[j] - ydiff;
            seg[0][j] = y[j];
            seg[1][j] = ydiff;
            seg[2][j] = bspl;
            seg[3][j] = ydiff - h * k7[j] - bspl;
            seg[4][j] = h
                * (D1 * k1[j] + D3 * k3[j] + D4 * k4[j] + D5 * k5[j] + D6 * k6[j] + D7 * k7[j]);
        }
        dense.push(seg);

        if y1.iter().any(|v| !v.is_finite()) {
            return Err(SimError::IntegrationFailure {
                step,
                t: times[step + 1],
                reason: "non-finite state".into(),
            });
        }
        let state = SeirState::from_array(y1);
        state.validate().map_err(|e| SimError::IntegrationFailure {
            step,
            t: times[step + 1],
            reason: e.to_string(),
        })?;
        states.push(state);
        y = y1;
        k1 = k7;
    }

    Ok(Trajectory { times, states, dense, max_embedded_err: max_err })
}

/// Evaluate the stored dense output at an arbitrary time in the domain.
pub fn eval_at(traj: &Trajectory, t: f64) -> Result<SeirState, SimError> {
    let lo = traj.times[0];
    let hi = traj.t_end();
    if !t.is_finite() || t < lo || t > hi {
        return Err(SimError::OutOfDomain { t, lo, hi });
    }
    // Grid points return the stored state bit-for-bit.
    if let Ok(idx) = traj.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        return Ok(traj.states[idx]);
    }
    let seg_idx = traj.times.partition_point(|&x| x <= t) - 1;
    let seg = &traj.dense[seg_idx];
    let h = traj.times[seg_idx + 1] - traj.times[seg_idx];
    let theta = (t - traj.times[seg_idx]) / h;
    let th1 = 1.0 - theta;
    let mut y = [0.0; 4];
    for j in 0..4 {
        y[j] = seg[0][j]
            + theta * (seg[1][j] + th1 * (seg[2][j] + theta * (seg[3][j] + th1 * seg[4][j])));
    }
    SeirState::from_array(y).validate().map(|_| SeirState::from_array(y))
}

/// First and second time derivatives of `I` obtained by substituting the
/// state into the governing equations.
pub fn analytic_i_derivatives(params: &EpiParams, state: &SeirState) -> (f64, f64) {
    let e_dot = params.beta * state.s * state.i - params.epsilon * state.e;
    let i_dot = params.epsilon * state.e - params.gamma * state.i;
    let i_ddot = params.epsilon * e_dot - params.gamma * i_dot;
    (i_dot, i_ddot)
}

/// Sampled observation times with `I` and its analytic derivatives; the
/// pseudo-data columns stay empty until reconstruction fills them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub times: Vec<f64>,
    pub i_obs: Vec<f64>,
    pub i_dot: Vec<f64>,
    pub i_ddot: Vec<f64>,
    pub pseudo_s: Option<Vec<f64>>,
    pub pseudo_e: Option<Vec<f64>>,
    pub pseudo_r: Option<Vec<f64>>,
}

impl ObservationSet {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn has_pseudo(&self) -> bool {
        self.pseudo_s.is_some() && self.pseudo_e.is_some() && self.pseudo_r.is_some()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.times.len();
        let mut lens = vec![self.i_obs.len(), self.i_dot.len(), self.i_ddot.len()];
        for opt in [&self.pseudo_s, &self.pseudo_e, &self.pseudo_r] {
            if let Some(v) = opt {
                lens.push(v.len());
            }
        }
        if lens.iter().any(|&l| l != n) {
            return Err(SimError::InvalidInput(
                "observation sequences must share one length".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Evenly spaced times including both endpoints.
    Train,
    /// Seeded i.i.d. uniform times over the domain, sorted.
    Test,
}

/// Sample `n` observation points from a simulated trajectory.
pub fn sample_observations(
    traj: &Trajectory,
    params: &EpiParams,
    n: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<ObservationSet, SimError> {
    if n < 2 {
        return Err(SimError::InvalidInput(format!("need at least 2 points (got {n})")));
    }
    let t_end = traj.t_end();
    let times: Vec<f64> = match mode {
        SampleMode::Train => (0..n).map(|j| j as f64 * t_end / (n - 1) as f64).collect(),
        SampleMode::Test => {
            let mut rng = SplitMix64::new(seed);
            let mut ts: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, t_end)).collect();
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts
        }
    };
    let mut i_obs = Vec::with_capacity(n);
    let mut i_dot = Vec::with_capacity(n);
    let mut i_ddot = Vec::with_capacity(n);
    for &t in &times {
        let st = eval_at(traj, t)?;
        let (d1, d2) = analytic_i_derivatives(params, &st);
        i_obs.push(st.i);
        i_dot.push(d1);
        i_ddot.push(d2);
    }
    Ok(ObservationSet {
        times,
        i_obs,
        i_dot,
        i_ddot,
        pseudo_s: None,
        pseudo_e: None,
        pseudo_r: None,
    })
}

/// Reference-scenario defaults shared by the experiments.
pub fn default_params() -> EpiParams {
    EpiParams { beta: 0.26, epsilon: 0.2, gamma: 0.1 }
}

pub fn default_init() -> SeirState {
    SeirState { s: 0.99, e: 0.0, i: 0.01, r: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> Trajectory {
        simulate(&default_params(), &default_init(), 200.0, 0.2).unwrap()
    }

    #[test]
    fn initial_state_is_exact() {
        let tr = traj();
        assert_eq!(tr.states()[0], default_init());
        assert_eq!(tr.times()[0], 0.0);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn conservation_at_every_grid_point() {
        let tr = traj();
        for st in tr.states() {
            assert!((st.sum() - 1.0).abs() <= CONSERVATION_TOL);
        }
    }

    #[test]
    fn s_monotone_down_r_monotone_up() {
        let tr = traj();
        for w in tr.states().windows(2) {
            assert!(w[1].s <= w[0].s + 1e-12);
            assert!(w[1].r >= w[0].r - 1e-12);
        }
    }

    #[test]
    fn halving_dt_barely_moves_the_endpoint() {
        let a = simulate(&default_params(), &default_init(), 200.0, 0.2).unwrap();
        let b = simulate(&default_params(), &default_init(), 200.0, 0.1).unwrap();
        let ya = a.states().last().unwrap();
        let yb = b.states().last().unwrap();
        for (u, v) in ya.as_array().iter().zip(yb.as_array()) {
            assert!((u - v).abs() <= 1e-8, "5th-order step halving moved state by {}", u - v);
        }
    }

    #[test]
    fn eval_at_grid_points_is_exact() {
        let tr = traj();
        let st = eval_at(&tr, 100.0).unwrap();
        let idx = tr.times().iter().position(|&t| t == 100.0).unwrap();
        assert_eq!(st, tr.states()[idx]);
        assert_eq!(eval_at(&tr, 0.0).unwrap(), default_init());
        assert_eq!(eval_at(&tr, 200.0).unwrap(), *tr.states().last().unwrap());
    }

    #[test]
    fn eval_at_rejects_outside_domain() {
        let tr = traj();
        assert!(matches!(eval_at(&tr, -0.1), Err(SimError::OutOfDomain { .. })));
        assert!(matches!(eval_at(&tr, 200.2), Err(SimError::OutOfDomain { .. })));
    }

    #[test]
    fn interpolated_states_conserve() {
        let tr = traj();
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let t = rng.uniform(0.0, 200.0);
            let st = eval_at(&tr, t).unwrap();
            assert!((st.sum() - 1.0).abs() <= CONSERVATION_TOL);
        }
    }

    #[test]
    fn i_derivatives_hand_values() {
        let p = default_params();
        let st = default_init();
        let (d1, d2) = analytic_i_derivatives(&p, &st);
        assert!((d1 - (-0.001)).abs() < 1e-15);
        assert!((d2 - 0.0006148).abs() < 1e-15);
    }

    #[test]
    fn i_derivatives_vanish_at_disease_free_point() {
        let p = EpiParams::new(0.7, 0.3, 0.2).unwrap();
        let st = SeirState::new(0.6, 0.0, 0.0, 0.4).unwrap();
        assert_eq!(analytic_i_derivatives(&p, &st), (0.0, 0.0));
    }

    #[test]
    fn i_derivatives_match_finite_differences_of_dense_output() {
        let tr = traj();
        let p = default_params();
        let h = 1e-3;
        // Mid-step points keep the centered stencils inside one interpolant
        // segment, away from its C1 seams.
        for k in [7usize, 93, 312, 608, 871] {
            let t = tr.times()[k] + 0.05;
            let st = eval_at(&tr, t).unwrap();
            let (d1, d2) = analytic_i_derivatives(&p, &st);
            let ip = eval_at(&tr, t + h).unwrap().i;
            let i0 = st.i;
            let im = eval_at(&tr, t - h).unwrap().i;
            let fd1 = (ip - im) / (2.0 * h);
            let fd2 = (ip - 2.0 * i0 + im) / (h * h);
            assert!((d1 - fd1).abs() < 1e-5, "dI mismatch at t={t}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-3, "ddI mismatch at t={t}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn train_sampling_is_even_with_endpoints() {
        let tr = traj();
        let p = default_params();
        let obs = sample_observations(&tr, &p, 50, SampleMode::Train, 0).unwrap();
        assert_eq!(obs.len(), 50);
        assert_eq!(obs.times[0], 0.0);
        assert_eq!(obs.times[49], 200.0);
        assert!((obs.times[1] - 200.0 / 49.0).abs() < 1e-13);
        let two = sample_observations(&tr, &p, 2, SampleMode::Train, 0).unwrap();
        assert_eq!(two.times, vec![0.0, 200.0]);
    }

    #[test]
    fn test_sampling_is_seed_deterministic_and_sorted() {
        let tr = traj();
        let p = default_params();
        let a = sample_observations(&tr, &p, 50, SampleMode::Test, 77).unwrap();
        let b = sample_observations(&tr, &p, 50, SampleMode::Test, 77).unwrap();
        assert_eq!(a, b);
        assert!(a.times.windows(2).all(|w| w[0] <= w[1]));
        let c = sample_observations(&tr, &p, 50, SampleMode::Test, 78).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn sampling_rejects_tiny_n() {
        let tr = traj();
        let p = default_params();
        assert!(sample_observations(&tr, &p, 1, SampleMode::Train, 0).is_err());
    }

    #[test]
    fn param_and_state_validation() {
        assert!(EpiParams::new(0.0, 0.2, 0.1).is_err());
        assert!(EpiParams::new(0.26, -0.1, 0.1).is_err());
        assert!(EpiParams::new(0.26, 0.2, f64::NAN).is_err());
        assert!(SeirState::new(0.5, 0.5, 0.1, -0.1).is_err());
        assert!(SeirState::new(0.99, 0.0, 0.01, 1e-12).is_ok());
    }

    #[test]
    fn simulate_rejects_bad_grid() {
        let p = default_params();
        let init = default_init();
        assert!(simulate(&p, &init, 200.0, -0.2).is_err());
        assert!(simulate(&p, &init, 0.0, 0.2).is_err());
        assert!(simulate(&p, &init, 200.0, 0.3).is_err());
    }

    #[test]
    fn embedded_error_stays_small() {
        let tr = traj();
        assert!(tr.max_embedded_err() < 1e-9, "embedded estimate {}", tr.max_embedded_err());
    }
}
