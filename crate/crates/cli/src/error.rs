//! Error type for the command-line layer, with the exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparsable, or semantically invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// The underlying computation failed (infeasible target, singular
    /// matrix, failed validation).
    #[error("numerical failure: {0}")]
    Numerical(#[from] cohest_core::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}
