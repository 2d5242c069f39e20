use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("query budget of {budget} calls exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("infeasible fairness constraint: {0}")]
    Infeasible(String),

    #[error("malformed recommendation list for item {source_item}: {reason}")]
    MalformedList { source_item: u32, reason: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("k-core with k={k} is empty")]
    EmptyCore { k: usize },

    #[error("dataset audit failed for {dataset}: {details}")]
    Audit { dataset: String, details: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
