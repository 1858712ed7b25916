//! Config-driven refinement studies on top of the `poem` estimator crate.

pub mod config;
pub mod cost;
pub mod output;
pub mod study;

use std::process::ExitCode;

pub use config::{ConfigError, Overrides, StudyConfig, ValidatedConfig};
pub use study::{Study, StudyOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("numerics: {0}")]
    Numerical(#[from] poem::Error),
    #[error("output: {0}")]
    Output(#[from] output::OutputError),
}

impl From<poem::schemes::SchemeError> for CliError {
    fn from(e: poem::schemes::SchemeError) -> Self {
        CliError::Numerical(e.into())
    }
}

impl From<poem::midas::MidasError> for CliError {
    fn from(e: poem::midas::MidasError) -> Self {
        CliError::Numerical(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Output(_) => 1,
        })
    }
}

/// Loads, solves and analyzes a study.
pub fn run_study(path: &std::path::Path, overrides: &Overrides) -> Result<StudyOutcome, CliError> {
    let config = ValidatedConfig::load(path, overrides)?;
    Study::prepare(config)?.run()
}
