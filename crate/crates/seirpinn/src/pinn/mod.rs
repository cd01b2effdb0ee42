//! The physics-informed network: model, composite loss, Adam, and the two
//! training modes.

pub mod adam;
pub mod loss;
pub mod model;
pub mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use loss::{loss_data, loss_eq, loss_init, total_loss, LossWeights};
pub use model::{LayerSpec, PinnModel, DEFAULT_SHAPE, DEFAULT_TIME_SCALE};
pub use train::{total_loss_gradient, train, TrainMode, TrainRecord};

#[derive(Debug, Error)]
pub enum PinnError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error(transparent)]
    Diff(#[from] crate::diffkit::DiffError),
    #[error("training aborted at epoch {epoch}: {reason}")]
    Aborted { epoch: usize, reason: String, record: Box<TrainRecord> },
}
