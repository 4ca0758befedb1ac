use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation at pole {0}")]
    PoleEvaluation(String),

    #[error("pole {pole} lies on or within {guard} of the region")]
    PoleOnSet { pole: String, guard: f64 },

    #[error("exponent out of range: {0}")]
    OutOfRange(String),

    #[error("divergent integral: kernel exponent q = {0} must be below 2")]
    DivergentIntegral(f64),

    #[error("function undefined at node {0}")]
    NodeEvaluation(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("transplant hypothesis violated: |x - x0| * potential = {lhs} is not below delta = {delta}")]
    TransplantHypothesis { lhs: f64, delta: f64 },

    #[error("numerical consistency: {0}")]
    NumericalConsistency(String),

    #[error("ill-conditioned system: condition estimate {estimate:e} exceeds {threshold:e}")]
    Conditioning { estimate: f64, threshold: f64 },

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
