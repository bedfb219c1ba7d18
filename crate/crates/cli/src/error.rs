use std::path::Path;

use thiserror::Error;

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] collapse_core::Error),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Config(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        use collapse_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Core(E::NumericalBlowup { .. }) => EXIT_NUMERIC,
            CliError::Core(E::TrajectoryFailures(fails))
                if fails.iter().any(|(_, e)| matches!(e, E::NumericalBlowup { .. })) =>
            {
                EXIT_NUMERIC
            }
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
