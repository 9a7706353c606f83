use std::path::PathBuf;

/// Every failure the library can report.
///
/// The `Display` output is a single line so the command-line front end can
/// print it verbatim as a machine-parsable reason.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("EmptyMeasure: measure has no atoms with positive mass")]
    EmptyMeasure,
    #[error("NonFinite: {0} contains NaN or infinite values")]
    NonFinite(&'static str),
    #[error("NegativeMass: weight {value} at atom {index} is negative")]
    NegativeMass { index: usize, value: f64 },
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("SolverFailure: {0}")]
    SolverFailure(String),
    #[error("EmptyAfterPrune: no plan entry exceeds threshold {0}")]
    EmptyAfterPrune(f64),
    #[error("TooFewPoints: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("TooFewClouds: need at least {needed}, got {got}")]
    TooFewClouds { needed: usize, got: usize },
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("BadInterval: start {start} must be below end {end}")]
    BadInterval { start: f64, end: f64 },
    #[error("BoundaryHoldout: step {step} is an endpoint of a {len}-step sequence")]
    BoundaryHoldout { step: usize, len: usize },
    #[error("BadDims: {0}")]
    BadDims(String),
    #[error("ParseError: line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short variant name, used as the leading token of CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyMeasure => "EmptyMeasure",
            Error::NonFinite(_) => "NonFinite",
            Error::NegativeMass { .. } => "NegativeMass",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SolverFailure(_) => "SolverFailure",
            Error::EmptyAfterPrune(_) => "EmptyAfterPrune",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::TooFewClouds { .. } => "TooFewClouds",
            Error::Config(_) => "ConfigError",
            Error::BadInterval { .. } => "BadInterval",
            Error::BoundaryHoldout { .. } => "BoundaryHoldout",
            Error::BadDims(_) => "BadDims",
            Error::Parse { .. } => "ParseError",
            Error::Io { .. } => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
