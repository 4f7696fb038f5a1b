use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("distribution function returned {value} at index {index} (must lie in [0, 1])")]
    InvalidCdf { index: i64, value: f64 },

    #[error("quantile {0} is outside the open interval (0, 1)")]
    InvalidQuantile(f64),

    #[error("level {0} is outside the open interval (0, 1)")]
    InvalidLevel(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("InsufficientWeights: series of length {needed} requested but weight matrix has {available} columns")]
    InsufficientWeights { needed: usize, available: usize },

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("MissingPair: lambda({j}|{i}) is not defined by the provider")]
    MissingPair { i: usize, j: usize },

    #[error("InvalidLambda: lambda({j}|{i}) = {value} is outside [0, 1]")]
    InvalidLambda { i: usize, j: usize, value: f64 },

    #[error("invalid block: n = {n}, m = {m} (need 1 <= n < m)")]
    InvalidBlock { n: usize, m: usize },

    #[error("IndexError: column {column} is out of range (columns 1..={available})")]
    Index { column: usize, available: usize },

    #[error("NoLimit: extrapolated values did not settle (spread {spread:e} > tolerance {tolerance:e})")]
    NoLimit { spread: f64, tolerance: f64 },

    #[error("NoExceedances: no observation exceeds level u = {u}")]
    NoExceedances { u: f64 },

    #[error("DegenerateCopula: empirical copula diagonal is zero at u = {u}")]
    DegenerateCopula { u: f64 },

    #[error("EmptyCell: every replica was skipped for model {model}, estimator {estimator}")]
    EmptyCell { model: String, estimator: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSeries(_)
                | Error::InvalidQuantile(_)
                | Error::InvalidLevel(_)
                | Error::InvalidParameter { .. }
                | Error::InsufficientWeights { .. }
                | Error::InvalidWeights(_)
                | Error::InvalidBlock { .. }
                | Error::Index { .. }
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
