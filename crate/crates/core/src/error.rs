use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least 3 servers for the malicious-minority model, got {0}")]
    TooFewServers(usize),

    #[error("share set is incomplete: expected {expected} shares, got {actual}")]
    MissingShare { expected: usize, actual: usize },

    #[error("shares belong to different servers ({left} vs {right})")]
    ServerMismatch { left: usize, right: usize },

    #[error("fixed-point scale mismatch ({left} vs {right} fractional bits)")]
    ScaleMismatch { left: u32, right: u32 },

    #[error("correlated randomness already consumed")]
    TripleReused,

    #[error("dealer exhausted: requested {requested} more elements, {remaining} remaining")]
    DealerExhausted { requested: usize, remaining: usize },

    #[error("value out of fixed-point range: {0}")]
    RangeOverflow(String),

    #[error("bit check failed: opened comparison output is not a bit")]
    BitCheckFailed,

    #[error("majority vote tie at ({row}, {col})")]
    VoteTie { row: usize, col: usize },

    #[error("bound undefined: {0}")]
    BoundUndefined(String),

    #[error("unsupported attack: {0}")]
    UnsupportedAttack(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
