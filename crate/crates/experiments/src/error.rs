use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sdnn_core::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot parse {path:?}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("loss became non-finite at epoch {epoch}")]
    NanLoss { epoch: usize },

    #[error("reference unavailable: {0}")]
    MissingReference(String),

    #[error("grid search needs {needed} runs, budget allows {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("configs differ in `{0}`; only alpha may differ")]
    ConfigMismatch(String),

    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable name of the variant, used in the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => e.kind(),
            Error::Config(_) => "Config",
            Error::Parse { .. } => "Parse",
            Error::NanLoss { .. } => "NanLoss",
            Error::MissingReference(_) => "MissingReference",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::ConfigMismatch(_) => "ConfigMismatch",
            Error::Io { .. } => "Io",
            Error::Image(_) => "Image",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
