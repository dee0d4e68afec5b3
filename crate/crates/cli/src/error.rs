use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }

    /// Wrap an error raised while reading or parsing inputs.
    pub fn data(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{context}: {err}"))
    }
}

impl From<minplus::Error> for CliError {
    fn from(err: minplus::Error) -> Self {
        use minplus::Error as E;
        match err {
            E::Config(_) => CliError::Usage(err.to_string()),
            E::Parse { .. } | E::Shape(_) => CliError::Data(err.to_string()),
            E::Domain(_)
            | E::NegativeCycle { .. }
            | E::UnboundedCoordinate { .. }
            | E::InfiniteResidual { .. }
            | E::OracleBudget { .. } => CliError::Numerical(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
