//! Estimation of the SEIR onset rate from an infectious-trajectory observation.
//!
//! The crate is organized around the stages of that estimation pipeline:
//!
//! - [`seir`]: ground-truth SEIR trajectories (fixed-step Dormand-Prince with
//!   dense output), analytic derivatives of `I`, and observation sampling.
//! - [`recon`]: pseudo-observations of the unobserved compartments `S`, `E`,
//!   `R` recovered from `(I, dI, ddI)` and a candidate onset rate.
//! - [`diffkit`]: the differentiation engine — dual numbers in the time input
//!   nested inside a reverse-mode tape over network parameters.
//! - [`pinn`]: the 4-output MLP, the composite loss, Adam, and both training
//!   modes (fixed onset rate with full pseudo-data, or trainable onset rate
//!   with `I`-only data).
//! - [`gpbo`]: one-dimensional Gaussian-process Bayesian optimization with
//!   Expected Improvement over the onset-rate search box.
//! - [`observability`]: exact-arithmetic verification that `E` and `S` are
//!   algebraically recoverable from the observed output, via a lex
//!   Groebner basis of the derivative-prolonged SEIR ideal.
//! - [`pipeline`]: orchestration of the two outer-loop experiments.

pub mod csvfmt;
pub mod diffkit;
pub mod gpbo;
pub mod observability;
pub mod pinn;
pub mod pipeline;
pub mod recon;
pub mod rng;
pub mod seir;

pub use seir::{EpiParams, ObservationSet, SeirState, Trajectory};
