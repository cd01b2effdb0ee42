//! Error classes mapped to process exit codes.

use thiserror::Error;

use seirpinn::gpbo::GpError;
use seirpinn::observability::GbError;
use seirpinn::pinn::PinnError;
use seirpinn::pipeline::PipelineError;
use seirpinn::recon::ReconError;
use seirpinn::seir::SimError;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CAPPED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("capped computation: {0}")]
    Capped(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Capped(_) => EXIT_CAPPED,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io: {e}"))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::IntegrationFailure { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ReconError> for CliError {
    fn from(e: ReconError) -> Self {
        match e {
            ReconError::Singular { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PinnError> for CliError {
    fn from(e: PinnError) -> Self {
        match e {
            PinnError::Config(_) => CliError::Validation(e.to_string()),
            PinnError::Diff(seirpinn::diffkit::DiffError::Shape(_)) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<GpError> for CliError {
    fn from(e: GpError) -> Self {
        match e {
            GpError::Factorization => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<GbError> for CliError {
    fn from(e: GbError) -> Self {
        match e {
            GbError::Capped(_) => CliError::Capped(e.to_string()),
            GbError::ZeroGenerator => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Sim(e) => e.into(),
            PipelineError::Recon(e) => e.into(),
            PipelineError::Pinn(e) => e.into(),
            PipelineError::Gp(e) => e.into(),
        }
    }
}
