use std::path::PathBuf;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no depth: disparity {0} is not positive")]
    NoDepth(f64),
    #[error("invalid depth {0} m: must be positive and finite")]
    InvalidDepth(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported format: {0}")]
    Format(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("invalid scene: {0}")]
    Spec(String),
    #[error("invalid calibration: {0}")]
    Calibration(String),
    #[error("invalid mask manifest: {0}")]
    Manifest(String),
    #[error("input contains no valid disparity")]
    NoValidData,
    #[error("insufficient depth support: valid ratio {valid_ratio:.3} < required {required:.3}")]
    InsufficientDepth { valid_ratio: f64, required: f64 },
    #[error("evaluation set is empty")]
    EmptyEval,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
