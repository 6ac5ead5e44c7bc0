use std::path::PathBuf;

use goldenrate_core::integrator::{IntegrationError, SteadyStateError};
use goldenrate_core::params::ParamError;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("unknown preset `{0}` (try `goldenrate presets`)")]
    UnknownPreset(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("bad override `{0}`: expected dotted.key=value")]
    BadOverride(String),
    #[error("bad rate `{0}`: expected a number with optional Hz, kHz, MHz or GHz suffix")]
    BadRate(String),
    #[error("invalid parameters: {}", join(.0))]
    Params(Vec<ParamError>),
    #[error("{0}")]
    Invalid(String),
}

fn join(errors: &[ParamError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("integration: {0}")]
    Integration(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("stochastic ensemble disagrees with the rate equations (max |z| = {max_z:.2})")]
    Disagreement { max_z: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Disagreement { .. } => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidConfig(_) | IntegrationError::InvalidInitialState(_) => {
                CliError::Config(ConfigError::Invalid(e.to_string()))
            }
            _ => CliError::Integration(e.to_string()),
        }
    }
}

impl From<SteadyStateError> for CliError {
    fn from(e: SteadyStateError) -> Self {
        match e {
            SteadyStateError::Integration(inner) => inner.into(),
            other => CliError::Integration(other.to_string()),
        }
    }
}
