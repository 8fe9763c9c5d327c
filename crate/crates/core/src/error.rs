use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("non-finite coordinate at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("weight at row {row} must be finite and strictly positive, got {value}")]
    InvalidWeight { row: usize, value: f64 },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("coincident centers: {first} and {second} have identical coordinates")]
    CoincidentCenters { first: usize, second: usize },

    #[error("empty cut set")]
    EmptyCutSet,

    #[error("build complete: every center is already separated")]
    BuildComplete,

    #[error("iteration cap exceeded ({0} rounds)")]
    IterationCap(usize),

    #[error("sampler stalled after {0} draws")]
    SamplerStalled(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tree invariant violated: {0}")]
    InvalidTree(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
