use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error at line {line} ({date}): {message}")]
    Validation {
        line: usize,
        date: String,
        message: String,
    },

    #[error("alignment error: no common dates ({ranges})")]
    Alignment { ranges: String },

    #[error("split error: {0}")]
    Split(String),

    #[error("degenerate column '{0}': zero variance")]
    DegenerateColumn(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rank deficient design: column '{column}' is linearly dependent on earlier columns")]
    Rank { column: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} did not converge")]
    NotConverged(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 2 for broken internal invariants, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) | Error::NotConverged(_) => 2,
            _ => 1,
        }
    }
}
