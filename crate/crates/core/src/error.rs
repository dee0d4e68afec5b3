use thiserror::Error;

/// Errors raised by the min-plus toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("Kleene star diverges: negative-weight cycle through node {node}")]
    NegativeCycle { node: usize },

    #[error("column {column} has no finite entry; the regression coordinate is unbounded")]
    UnboundedCoordinate { column: usize },

    #[error("row {row} has no finite entry; the residual is infinite for every x")]
    InfiniteResidual { row: usize },

    #[error("enumeration of {paths} paths exceeds the oracle budget of {budget}")]
    OracleBudget { paths: u128, budget: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
