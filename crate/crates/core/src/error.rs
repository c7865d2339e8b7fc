use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed row or field in an input file.
    #[error("parse error in {file} line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    /// Input parsed cleanly but violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("chain stalled after {0} consecutive rejected proposals")]
    Stalled(u64),

    #[error("attempt budget exhausted: {accepted} of {target} plans after {attempts} runs; failures: {failures}")]
    BudgetExhausted {
        target: usize,
        accepted: usize,
        attempts: usize,
        failures: String,
    },

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("statewide two-party vote total is zero")]
    ZeroTwoPartyTotal,

    #[error("parity is not reachable within +/-50 points")]
    ParityUnreachable,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error: 1 for data/validation failures,
    /// 2 for usage and parse errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::Io { .. } | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
