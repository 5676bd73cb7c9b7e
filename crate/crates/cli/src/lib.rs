//! Library side of the `medop` command-line tool.

pub mod commands;
pub mod plot;
pub mod report;

use thiserror::Error;

/// A command failure that maps to exit status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] medop::scenario::ScenarioError),
    #[error(transparent)]
    Evolution(#[from] medop::evolution::EvolutionError),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().display().to_string();
        move |source| CliError::Io { path, source }
    }
}
