use thiserror::Error;

pub type Result<T> = std::result::Result<T, AmacError>;

#[derive(Debug, Error)]
pub enum AmacError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sender subset must be non-empty")]
    EmptySubset,

    #[error("decoded set overlaps target sender {0}")]
    Overlap(usize),

    #[error("sender index {index} out of range for {senders} senders")]
    SenderIndex { index: usize, senders: usize },

    #[error("rate vector has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polytope carries no channel/input provenance")]
    MissingProvenance,

    #[error("rate vector is not on the dominant face (sum gap {gap:.3e})")]
    NotOnDominantFace { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical procedure failed: {0}")]
    Numerical(String),

    #[error("capacity limit exceeded: {0}")]
    Capacity(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AmacError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        AmacError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
