use thiserror::Error;

/// Errors raised by the arithmetic, set and chain layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value {value} is out of range ({reason})")]
    OutOfRange { value: u64, reason: &'static str },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("bound x = {x} exceeds the sieve limit {limit}")]
    BeyondSieve { x: u64, limit: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
