use std::path::PathBuf;

/// Errors produced by the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported derivative: {0}")]
    UnsupportedDerivative(String),

    #[error("tape does not match network: {0}")]
    TapeMismatch(String),

    #[error("bad layer widths {0:?}")]
    BadWidths(Vec<usize>),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("bad domain box: {0}")]
    BadBox(String),

    #[error("bad grid step: {0}")]
    BadStep(String),

    #[error("candidate pools hold {available} points, {requested} requested")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("empty data set: {0}")]
    EmptyData(&'static str),

    #[error("point ({t}, {x}) lies outside the {problem} domain")]
    DomainViolation {
        problem: &'static str,
        t: f64,
        x: f64,
    },

    #[error("Newton iteration for Gauss-Hermite node {index} of order {order} did not converge")]
    ConvergenceFailure { order: usize, index: usize },

    #[error("quadrature order {0} outside 1..=200")]
    BadOrder(usize),

    #[error("non-finite intermediate value in {0}")]
    NonFiniteIntermediate(&'static str),

    #[error("length {0} is not a power of two")]
    BadLength(usize),

    #[error("solution blew up at t = {t}: max |u| = {max_abs}")]
    UnstableBlowup { t: f64, max_abs: f64 },

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("checkpoint is corrupt: {0}")]
    CorruptChecksum(String),

    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::UnsupportedDerivative(_) => "UnsupportedDerivative",
            Error::TapeMismatch(_) => "TapeMismatch",
            Error::BadWidths(_) => "BadWidths",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ZeroReference => "ZeroReference",
            Error::BadBox(_) => "BadBox",
            Error::BadStep(_) => "BadStep",
            Error::PoolTooSmall { .. } => "PoolTooSmall",
            Error::EmptyData(_) => "EmptyData",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::BadOrder(_) => "BadOrder",
            Error::NonFiniteIntermediate(_) => "NonFiniteIntermediate",
            Error::BadLength(_) => "BadLength",
            Error::UnstableBlowup { .. } => "UnstableBlowup",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CorruptChecksum(_) => "CorruptChecksum",
            Error::Io { .. } => "IoError",
            Error::Csv(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
