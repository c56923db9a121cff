use thiserror::Error;

/// Errors produced by the numerical engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("size limit exceeded: {requested} > {limit}")]
    SizeLimit { requested: usize, limit: usize },

    #[error("matrix is singular to working precision (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("exponent at offset {offset} must be a nonnegative integer literal")]
    BadExponent { offset: usize },

    #[error("evaluation domain error in `{node}`")]
    EvalDomain { node: String },

    #[error("wrong number of arguments: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("function failed the analyticity probe on the given contours")]
    NotAnalytic,

    #[error("contour does not enclose the spectrum (eigenvalue {re:+e}{im:+e}i)")]
    ContourExcludesSpectrum { re: f64, im: f64 },

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
