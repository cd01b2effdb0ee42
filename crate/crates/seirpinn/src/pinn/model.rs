//! The 4-output fully connected network and its flattened parameter layout.

use serde::{Deserialize, Serialize};

use crate::diffkit::Dual;
use crate::rng::SplitMix64;

use super::PinnError;

/// Default architecture: three hidden layers of 50 tanh units.
pub const DEFAULT_SHAPE: [usize; 5] = [1, 50, 50, 50, 4];
/// Default input normalization divisor (the length of the time domain).
pub const DEFAULT_TIME_SCALE: f64 = 200.0;

/// Offsets of one layer inside the flattened parameter vector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LayerSpec {
    pub w: usize,
    pub b: usize,
    pub rows: usize,
    pub cols: usize,
}

/// MLP weights plus, in the inverse-problem mode, a trainable onset rate
/// appended as the final parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PinnModel {
    shape: Vec<usize>,
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
    time_scale: f64,
    trainable_eps: bool,
}

impl PinnModel {
    /// Glorot-uniform weights, zero biases, at the default shape.
    pub fn init_glorot(seed: u64) -> Self {
        Self::with_shape(&DEFAULT_SHAPE, seed, DEFAULT_TIME_SCALE)
            .expect("default shape is valid")
    }

    /// Glorot-uniform weights for an arbitrary 1-input 4-output shape.
    pub fn with_shape(shape: &[usize], seed: u64, time_scale: f64) -> Result<Self, PinnError> {
        if shape.len() < 2 || shape[0] != 1 || *shape.last().unwrap() != 4 {
            return Err(PinnError::Config(format!(
                "shape must run from 1 input to 4 outputs (got {shape:?})"
            )));
        }
        if !(time_scale.is_finite() && time_scale > 0.0) {
            return Err(PinnError::Config(format!("time_scale must be positive (got {time_scale})")));
        }
        let mut layers = Vec::with_capacity(shape.len() - 1);
        let mut off = 0;
        for pair in shape.windows(2) {
            let (cols, rows) = (pair[0], pair[1]);
            layers.push(LayerSpec { w: off, b: off + rows * cols, rows, cols });
            off += rows * cols + rows;
        }
        let mut params = vec![0.0; off];
        let mut rng = SplitMix64::new(seed);
        for layer in &layers {
            let limit = (6.0 / (layer.cols + layer.rows) as f64).sqrt();
            for k in 0..layer.rows * layer.cols {
                params[layer.w + k] = rng.uniform(-limit, limit);
            }
            // biases stay zero
        }
        Ok(Self { shape: shape.to_vec(), layers, params, time_scale, trainable_eps: false })
    }

    /// Append a trainable onset rate initialized at `eps0`.
    pub fn with_trainable_epsilon(mut self, eps0: f64) -> Self {
        assert!(!self.trainable_eps, "trainable epsilon already present");
        self.trainable_eps = true;
        self.params.push(eps0);
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    /// Total parameter count including the trainable onset rate if present.
    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Index of the trainable onset rate inside the parameter vector.
    pub fn epsilon_index(&self) -> Option<usize> {
        self.trainable_eps.then(|| self.params.len() - 1)
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon_index().map(|i| self.params[i])
    }

    /// Forward pass on already-normalized dual input.
    fn forward_normalized(&self, x: Dual) -> [Dual; 4] {
        let mut cur = vec![x];
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = vec![Dual::default(); layer.rows];
            for j in 0..layer.rows {
                let mut acc = Dual::constant(self.params[layer.b + j]);
                let wrow = &self.params[layer.w + j * layer.cols..][..layer.cols];
                for (wk, xk) in wrow.iter().zip(&cur) {
                    acc = acc + *xk * *wk;
                }
                next[j] = if li + 1 < self.layers.len() { acc.tanh() } else { acc };
            }
            cur = next;
        }
        [cur[0], cur[1], cur[2], cur[3]]
    }

    /// Network outputs and their derivatives per unit of original time.
    ///
    /// The input is normalized by the time scale internally; the chain-rule
    /// factor rides in on the dual seed, so callers never see it.
    pub fn predict(&self, t: f64) -> ([f64; 4], [f64; 4]) {
        let x = Dual::variable(t / self.time_scale, 1.0 / self.time_scale);
        let out = self.forward_normalized(x);
        (
            [out[0].value, out[1].value, out[2].value, out[3].value],
            [out[0].deriv, out[1].deriv, out[2].deriv, out[3].deriv],
        )
    }
}
