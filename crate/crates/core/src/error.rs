//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("shape mismatch in {op}: left is {left}, right is {right}")]
    Shape {
        op: String,
        left: String,
        right: String,
    },

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A file could not be parsed. `line` is 1-based (0 when unknown).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A subsample target asks for more instances than a cell holds.
    #[error("subsample target for cell ({label}, {attribute}={category}) wants {wanted} but only {available} available")]
    Capacity {
        label: String,
        attribute: String,
        category: String,
        wanted: usize,
        available: usize,
    },

    /// A bias task has no instance with a sensitive primary label.
    #[error("empty support: {0}")]
    EmptySupport(String),

    /// An association query matched no test instance.
    #[error("no support: {0}")]
    NoSupport(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch} (learning rate {learning_rate})")]
    Divergence { epoch: usize, learning_rate: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse(0, format!("csv: {other:?}")),
        }
    }
}

impl Error {
    pub(crate) fn shape(op: &str, left: impl std::fmt::Display, right: impl std::fmt::Display) -> Self {
        Error::Shape {
            op: op.to_string(),
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
