use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("alphabet size mismatch: expected {expected}, got {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("empty observation sequence")]
    EmptySequence,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph file line {line}: {message}")]
    GraphFile { line: usize, message: String },

    #[error("invalid combination matrix: {0}")]
    InvalidCombination(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid engine configuration: {0}")]
    Config(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("scenario {path}: {message}")]
    Scenario { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("beta extrapolation did not converge: estimates {first} and {second} differ by more than {tolerance}")]
    BetaNotConverged {
        first: f64,
        second: f64,
        tolerance: f64,
    },

    #[error("covariance is not positive semi-definite (eigenvalue {0})")]
    NotPositiveSemiDefinite(f64),

    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("malformed results file line {line}: {message}")]
    ResultsFile { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn scenario(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    ///
    /// Validation failures map to 2, numerical diagnostics to 3, anything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BetaNotConverged { .. }
            | Error::NotPositiveSemiDefinite(_)
            | Error::CheckFailed(_) => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
