use thiserror::Error;

use covert_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for unusable input, 3 when reduction leaves nothing to analyze,
    /// 4 when a solver does not converge, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Parse(_)
                | CoreError::NonStochastic { .. }
                | CoreError::InvalidEntry { .. }
                | CoreError::DuplicateRows(..)
                | CoreError::UnknownOff(_) => 2,
                CoreError::NoCovertInput | CoreError::NoNonOffInput => 3,
                e if e.is_convergence() => 4,
                _ => 1,
            },
            CliError::Read { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
