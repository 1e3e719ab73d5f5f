use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    #[error("relation `{relation}` used with arity {found}, declared arity {expected}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("variable `{0}` does not occur in any atom")]
    UnboundVariable(String),

    #[error("relation `{0}` is missing from the database")]
    MissingRelation(String),

    #[error("invalid database: {0}")]
    InvalidDatabase(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} limit exceeded ({value} > {limit})")]
    LimitExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("oracle budget exceeded after {calls} calls")]
    BudgetExceeded { calls: u64 },

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("vertex {0} is not covered by any hyperedge")]
    UncoverableVertex(usize),

    #[error("weights do not form a fractional independent set: {0}")]
    NotIndependent(String),

    #[error("signature mismatch: relation `{0}` has no counterpart in the target structure")]
    SignatureMismatch(String),

    #[error("operation requires a plain conjunctive query: {0}")]
    NotPlainCq(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
