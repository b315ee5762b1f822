use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the range where the operation is defined.
    #[error("{0}")]
    Domain(String),

    /// Caller-supplied data is inconsistent (bad index, length mismatch).
    #[error("{0}")]
    Input(String),

    /// Malformed text input. Line and column are one-based.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An exhaustive search would exceed its configured budget.
    #[error("exhaustive search needs {required} candidate sets, budget is {budget}")]
    Budget { required: u128, budget: u128 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
