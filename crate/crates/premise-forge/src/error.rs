use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty question")]
    EmptyQuestion,

    #[error("bad premise arity: {0}")]
    BadPremiseArity(String),

    #[error("unsupported premise order: {0}")]
    UnsupportedPremiseOrder(String),

    #[error("no negative found")]
    NoNegativeFound,

    #[error("missing feature vector for image {0}")]
    MissingFeature(u64),

    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("loss became NaN at epoch {epoch} (lr {lr})")]
    NanLoss { epoch: usize, lr: f64 },

    #[error("question id collision: {0}")]
    IdCollision(u64),

    #[error("bad file magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("missing caption for image {0}")]
    MissingCaption(u64),

    #[error("{0}")]
    Invalid(String),
}

impl ForgeError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ForgeError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        ForgeError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ForgeError>;
