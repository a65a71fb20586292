use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input: bad JSON, bad number syntax, dangling names.
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed input that does not fit the operation (unknown label,
    /// alphabet mismatch, out-of-range parameter).
    #[error("input error: {0}")]
    Input(String),

    /// The operation requires a property the input lacks, e.g. acyclicity.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Word enumeration visited more prefixes than allowed.
    #[error(
        "enumeration budget exceeded after visiting {visited} prefixes (budget {budget}){detail}"
    )]
    BudgetExceeded {
        visited: u64,
        budget: u64,
        detail: String,
    },

    /// A size cap (determinization states, step count) was hit.
    #[error("{what} cap exceeded: {limit}{detail}")]
    CapExceeded {
        what: &'static str,
        limit: u64,
        detail: String,
    },

    #[error("sampled word exceeds maximum length {max_len}")]
    LengthExceeded { max_len: usize },

    #[error("brute-force oracle infeasible: {support} support words exceed the cap of {cap}")]
    OracleInfeasible { support: usize, cap: usize },

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// True for budget and cap failures, which callers usually report
    /// differently from genuine domain errors.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::CapExceeded { .. }
        )
    }
}
