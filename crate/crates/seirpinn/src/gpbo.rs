//! One-dimensional Gaussian-process Bayesian optimization with Expected
//! Improvement, minimizing a scalar objective over a closed box.
//!
//! The surrogate is an exact GP with a Matern-5/2 kernel on internally
//! standardized objective values; the length scale comes from a small
//! log-spaced grid scored by log marginal likelihood. Acquisition is EI
//! maximized over a dense grid with ties broken toward the smallest input.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::rng::SplitMix64;

/// Noise floor added to the kernel diagonal (standardized scale).
pub const NOISE_FLOOR: f64 = 1e-10;
/// Exploration margin inside the improvement term.
pub const DEFAULT_XI: f64 = 0.01;
/// Acquisition grid resolution over the box.
pub const ACQUISITION_GRID: usize = 1001;
/// Objective value recorded for a failed inner run.
pub const FAILURE_PENALTY: f64 = 1e6;

const LENGTH_SCALE_GRID: usize = 10;
const LENGTH_SCALE_LO: f64 = 0.01;
const LENGTH_SCALE_HI: f64 = 0.5;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("no finite observations to fit")]
    Empty,
    #[error("kernel factorization failed even after jitter escalation")]
    Factorization,
    #[error("invalid bayesian-optimization options: {0}")]
    InvalidOptions(String),
}

/// Exact GP posterior over the standardized objective.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Points dropped for a non-finite objective, kept for the run log.
    pub excluded: Vec<(f64, f64)>,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise: f64,
    y_mean: f64,
    y_std: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

fn matern52(r: f64, ell: f64) -> f64 {
    let a = 5.0_f64.sqrt() * r.abs() / ell;
    (1.0 + a + a * a / 3.0) * (-a).exp()
}

fn kernel_matrix(xs: &[f64], ell: f64, noise: f64) -> DMatrix<f64> {
    let n = xs.len();
    DMatrix::from_fn(n, n, |i, j| {
        matern52(xs[i] - xs[j], ell) + if i == j { noise } else { 0.0 }
    })
}

/// Fit the GP to `(x, y)` observations; non-finite objectives are excluded.
pub fn gp_fit(points: &[(f64, f64)]) -> Result<GpPosterior, GpError> {
    let mut xs = Vec::new();
    let mut ys_raw = Vec::new();
    let mut excluded = Vec::new();
    for &(x, y) in points {
        if y.is_finite() && x.is_finite() {
            xs.push(x);
            ys_raw.push(y);
        } else {
            excluded.push((x, y));
        }
    }
    let n = xs.len();
    if n == 0 {
        return Err(GpError::Empty);
    }
    let y_mean = ys_raw.iter().sum::<f64>() / n as f64;
    let var = ys_raw.iter().map(|y| (y - y_mean) * (y - y_mean)).sum::<f64>() / n as f64;
    let y_std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let ys: Vec<f64> = ys_raw.iter().map(|y| (y - y_mean) / y_std).collect();
    let yv = DVector::from_column_slice(&ys);

    let mut best: Option<(f64, f64, Cholesky<f64, Dyn>, DVector<f64>, f64)> = None;
    for j in 0..LENGTH_SCALE_GRID {
        let ell = LENGTH_SCALE_LO
            * (LENGTH_SCALE_HI / LENGTH_SCALE_LO).powf(j as f64 / (LENGTH_SCALE_GRID - 1) as f64);
        let (chol, noise) = factorize_with_jitter(&xs, ell)?;
        let alpha = chol.solve(&yv);
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let lml = -0.5 * yv.dot(&alpha)
            - 0.5 * log_det
            - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        let better = match &best {
            None => true,
            Some((_, _, _, _, best_lml)) => lml > *best_lml,
        };
        if better {
            best = Some((ell, noise, chol, alpha, lml));
        }
    }
    let (length_scale, noise, chol, alpha, _) = best.expect("grid is non-empty");
    Ok(GpPosterior {
        xs,
        ys,
        excluded,
        length_scale,
        signal_variance: 1.0,
        noise,
        y_mean,
        y_std,
        chol,
        alpha,
    })
}

fn factorize_with_jitter(xs: &[f64], ell: f64) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    let mut noise = NOISE_FLOOR;
    // Duplicate evaluation points make the kernel singular at the floor;
    // escalate deterministically instead of failing the outer loop.
    for _ in 0..8 {
        if let Some(chol) = Cholesky::new(kernel_matrix(xs, ell, noise)) {
            return Ok((chol, noise));
        }
        noise *= 100.0;
    }
    Err(GpError::Factorization)
}

impl GpPosterior {
    pub fn observations(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| (x, y * self.y_std + self.y_mean))
    }

    /// Smallest observed objective on the original scale.
    pub fn best_observed(&self) -> f64 {
        self.ys.iter().fold(f64::INFINITY, |a, &y| a.min(y * self.y_std + self.y_mean))
    }

    /// Posterior mean and standard deviation on the original scale.
    pub fn predict(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let kstar = DVector::from_fn(n, |i, _| matern52(x - self.xs[i], self.length_scale));
        let mu = kstar.dot(&self.alpha);
        let v = self.chol.solve(&kstar);
        let var = (self.signal_variance - kstar.dot(&v)).max(0.0);
        (self.y_mean + self.y_std * mu, self.y_std * var.sqrt())
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Closed-form EI for minimization given a posterior mean and deviation.
pub fn ei_value(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    let gap = best - mu - xi;
    if sigma == 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    gap * normal_cdf(z) + sigma * normal_pdf(z)
}

/// Expected improvement of a candidate under the posterior.
///
/// `xi` is measured on the internally standardized objective scale, so the
/// same margin works whether objectives sit at 1e-6 or 1e2; the returned
/// EI is on that scale too (a monotone rescaling, so argmax positions are
/// unaffected).
pub fn expected_improvement(post: &GpPosterior, x: f64, best: f64, xi: f64) -> f64 {
    let (mu, sigma) = post.predict(x);
    let mu_n = (mu - post.y_mean) / post.y_std;
    let sigma_n = sigma / post.y_std;
    let best_n = (best - post.y_mean) / post.y_std;
    ei_value(mu_n, sigma_n, best_n, xi)
}

fn propose_from_grid(post: &GpPosterior, lo: f64, hi: f64, xi: f64, taken: &[f64]) -> f64 {
    let best = post.best_observed();
    let mut arg = None;
    let mut top = f64::NEG_INFINITY;
    for k in 0..ACQUISITION_GRID {
        let x = lo + (hi - lo) * k as f64 / (ACQUISITION_GRID - 1) as f64;
        if taken.iter().any(|t| (t - x).abs() < 1e-9) {
            continue;
        }
        let ei = expected_improvement(post, x, best, xi);
        if ei > top {
            top = ei;
            arg = Some(x);
        }
    }
    arg.unwrap_or(lo)
}

/// Argmax of EI over the dense acquisition grid; exact ties go to the
/// smallest candidate.
pub fn propose_next(post: &GpPosterior, lo: f64, hi: f64, xi: f64) -> f64 {
    propose_from_grid(post, lo, hi, xi, &[])
}

/// One evaluation of the outer-loop objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BoEval {
    pub iteration: usize,
    pub epsilon: f64,
    pub objective: f64,
    pub is_initial: bool,
    /// True when the inner run failed and the penalty value was recorded.
    pub failed: bool,
    /// Failure message for the run log.
    pub note: Option<String>,
}

/// Full trace of a Bayesian-optimization run.
#[derive(Debug, Clone)]
pub struct BoResult {
    pub evaluations: Vec<BoEval>,
    pub epsilon_hat: f64,
    pub best_objective: f64,
}

impl BoResult {
    /// Running minimum per iteration.
    pub fn best_trace(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.evaluations
            .iter()
            .map(|e| {
                best = best.min(e.objective);
                best
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoOptions {
    pub iterations: usize,
    pub init_count: usize,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
    pub xi: f64,
}

impl BoOptions {
    pub fn new(iterations: usize, init_count: usize, seed: u64) -> Self {
        Self { iterations, init_count, seed, lo: 0.0, hi: 0.5, xi: DEFAULT_XI }
    }

    fn validate(&self) -> Result<(), GpError> {
        if self.init_count < 1 || self.iterations < self.init_count {
            return Err(GpError::InvalidOptions(format!(
                "need iterations >= init_count >= 1 (got {} and {})",
                self.iterations, self.init_count
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(GpError::InvalidOptions(format!("bad box [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

/// Minimize `objective` with `opts.init_count` stratified-uniform seeds
/// followed by EI proposals, `opts.iterations` evaluations in total.
pub fn run_bo<F>(mut objective: F, opts: &BoOptions) -> Result<BoResult, GpError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    opts.validate()?;
    let mut rng = SplitMix64::new(opts.seed);
    let mut evals: Vec<BoEval> = Vec::with_capacity(opts.iterations);

    let width = (opts.hi - opts.lo) / opts.init_count as f64;
    for i in 0..opts.iterations {
        let is_initial = i < opts.init_count;
        let x = if is_initial {
            // One uniform draw per stratum covers the box quasi-uniformly.
            opts.lo + width * (i as f64 + rng.next_f64())
        } else {
            // The surrogate sees real measurements only: a penalty row is
            // bookkeeping for a failed run, and at 1e6 it would flatten the
            // standardized objective into noise. The taken-point guard
            // keeps a failing region from pinning the proposal loop.
            let pts: Vec<(f64, f64)> =
                evals.iter().filter(|e| !e.failed).map(|e| (e.epsilon, e.objective)).collect();
            let taken: Vec<f64> = evals.iter().map(|e| e.epsilon).collect();
            match gp_fit(&pts) {
                Ok(post) => propose_from_grid(&post, opts.lo, opts.hi, opts.xi, &taken),
                // Every evaluation so far failed: keep sampling uniformly.
                Err(GpError::Empty) => rng.uniform(opts.lo, opts.hi),
                Err(e) => return Err(e),
            }
        };
        let (y, failed, note) = match objective(x) {
            Ok(v) if v.is_finite() => (v, false, None),
            Ok(v) => (FAILURE_PENALTY, true, Some(format!("non-finite objective {v}"))),
            Err(msg) => (FAILURE_PENALTY, true, Some(msg)),
        };
        evals.push(BoEval { iteration: i, epsilon: x, objective: y, is_initial, failed, note });
    }

    let best = evals
        .iter()
        .min_by(|a, b| a.objective.partial_cmp(&b.objective).unwrap())
        .expect("at least one evaluation");
    let (epsilon_hat, best_objective) = (best.epsilon, best.objective);
    Ok(BoResult { evaluations: evals, epsilon_hat, best_objective })
}
