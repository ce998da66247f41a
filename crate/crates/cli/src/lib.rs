//! Experiment runner behind the `distbound` binary: config parsing,
//! named scenarios and the artifacts they write.

pub mod config;
pub mod output;
pub mod scenarios;

pub use config::{parse_params, RunConfig, DEFAULT_SEED};
pub use output::{write_artifacts, Format, Manifest};
pub use scenarios::{find, Assertion, Cell, Outcome, Scenario, Table, SCENARIOS};

use distbound::bounds::BoundsError;
use distbound::evolution::EvolutionError;
use distbound::models::ModelError;
use distbound::nagumo::NagumoError;
use distbound::sets::SetError;
use distbound::spaces::SpaceError;
use distbound::stochastic::StochError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown scenario `{0}` (see `distbound list-scenarios`)")]
    UnknownScenario(String),
    #[error("invalid config at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Nagumo(#[from] NagumoError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl CliError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid { path: path.into(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
