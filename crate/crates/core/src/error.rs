use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("zero polynomial has no factorization")]
    ZeroPolynomial,

    #[error("recurrence order exceeds bound {bound}")]
    RecurrenceTooLong { bound: usize },

    #[error("sequence is not a signed sum of powers: {0}")]
    NotPowerSum(String),

    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("map is not an affine homotopy lift: {0}")]
    InvalidMap(String),

    #[error("holonomy closure exceeded {cap} elements")]
    HolonomyTooLarge { cap: usize },

    #[error("averaging sum is not integral: {0}")]
    NonIntegral(String),

    #[error("inconsistent positive part: {0}")]
    PositivePart(String),

    #[error("zeta routes disagree: {0}")]
    RouteMismatch(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
