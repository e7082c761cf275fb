use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinates ({x1},{x2}) have mixed parity")]
    Parity { x1: i64, x2: i64 },
    #[error("not a permutation of the four directions: {0}")]
    NotPermutation(String),
    #[error("direction list does not follow the rotor sequence: {0}")]
    SequenceOrder(String),
    #[error("zero polynomial has no sign variations")]
    ZeroPolynomial,
    #[error("no block matches phase [{lo}, {hi}] at {vertex}")]
    NoBlock { vertex: String, lo: i64, hi: i64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("walk exceeded its step budget of {0}")]
    StepBudget(u64),
    #[error("float fast path disagrees with exact value at {0}")]
    FloatMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
