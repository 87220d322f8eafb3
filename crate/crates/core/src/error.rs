use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid half-integral matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("rank {0} is odd")]
    OddRank(usize),
    #[error("outside desk scale: {0}")]
    OutOfScale(String),
    #[error("index with trace {trace} lies outside the window of trace bound {bound}")]
    OutOfRange { trace: i64, bound: i64 },
    #[error("coefficient {value} at {index} is not p-integral for p = {p}")]
    NotIntegral { index: String, value: String, p: u64 },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("local density unstable: {0}")]
    Unstable(String),
    #[error("singular fit system: {0}")]
    SingularFit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
