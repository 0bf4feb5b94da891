use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("multiplexing gain {0} outside [0, 1]")]
    GainOutOfRange(f64),
    #[error("invalid protocol parameters: {0}")]
    InvalidProtocol(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("optimal phase ratio is unbounded at r = 1")]
    UnboundedKappa,
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("need at least 3 points with nonzero outage to fit a slope, got {0}")]
    TooFewPoints(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
