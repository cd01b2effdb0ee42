//! Differentiation engine: forward-mode dual numbers in the scalar time
//! input, nested inside a reverse-mode tape over the parameters.
//!
//! The primitive set is closed and small — affine maps, tanh, the four
//! arithmetic operations, squaring — which keeps every derivative rule in
//! this module auditable. Losses that read the network's time derivative
//! (through [`tape::TapeBuilder::deriv_at`]) get exact mixed
//! weight-and-time derivatives because adjoints propagate through both dual
//! channels.

pub mod dual;
pub mod tape;

pub use dual::{forward_with_time_derivative, Dual};
pub use tape::{gradient, DiffError, NodeId, Tape, TapeBuilder, TapeWorkspace};
