use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("density is not nondecreasing at breakpoint {index} ({prev} > {next})")]
    NotNondecreasing { index: usize, prev: f64, next: f64 },

    #[error("Φ vanishes at u = {0} > 0; c* is undefined")]
    DegenerateConvex(f64),

    #[error("depth {requested} out of range (tree depth {depth})")]
    DepthOutOfRange { requested: usize, depth: usize },

    #[error("malformed filtration tree: {0}")]
    MalformedTree(String),

    #[error("process is not a martingale: node {node} at depth {depth} deviates by {deviation:e}")]
    NotMartingale { node: usize, depth: usize, deviation: f64 },

    #[error("process is not a nonnegative submartingale starting at 0: {0}")]
    NotSubmartingale(String),

    #[error("negative value {value} at node {node}")]
    NegativeValue { node: usize, value: f64 },

    #[error("previsibility violated at node {node}: {reason}")]
    NotPrevisible { node: usize, reason: String },

    #[error("intensity measure: {0}")]
    Measure(String),

    #[error("mark #{mark} at t = {t} (z = {z:?}) lies outside the integrand's domain")]
    MarkOutsideDomain { t: f64, mark: usize, z: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("non-finite estimate in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { path: path.into(), reason: reason.into() }
    }
}
