use thiserror::Error;

use crate::model::CompositeService;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("empty interval: end {end} must be greater than start {start}")]
    EmptyInterval { start: i64, end: i64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("aggregate reliability undefined for a composite with zero total energy")]
    UndefinedAggregate,

    #[error("search space of {count} compositions exceeds the cap of {cap}")]
    SearchSpaceOverflow { count: u128, cap: u128 },

    #[error("no feasible composition for query `{query_id}`")]
    NoFeasibleComposition {
        query_id: String,
        nearest_miss: Option<Box<CompositeService>>,
    },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn field(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
