//! Library surface of the reproduction front-end; the binary in `main.rs`
//! is a thin argument parser over these pieces.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod svg;

pub use commands::Ctx;
pub use config::RunConfig;
pub use error::CliError;
