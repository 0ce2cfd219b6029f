use std::path::PathBuf;

/// Errors raised by the model, decoders, statistics and experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector or index does not fit the dimensions it is used with.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The request cannot be satisfied for the given sizes (e.g. more rows
    /// than the parent transform has, more picks than columns remain).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A statistic was requested over an empty population.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    /// Inputs violate a documented calling contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Query outside the range covered by a table.
    #[error("out of range: {0}")]
    Range(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
