use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("pattern size {k} unsupported (maximum {max})")]
    UnsupportedSize { k: usize, max: usize },

    #[error("exact evaluation needs {required} tuple evaluations, budget is {budget}; use sampled mode")]
    BudgetExceeded { required: f64, budget: f64 },

    #[error("no hub weight up to {max_weight} produces the requested excess (a = {a})")]
    InfeasibleThreshold { a: f64, max_weight: f64 },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("experiment refused: {0}")]
    Refused(String),

    #[error("malformed pattern: {0}")]
    Pattern(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
