use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("pixel buffer has {got} entries, expected {expected}")]
    BufferLength { expected: usize, got: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("morphology radius must be at least 1")]
    ZeroRadius,

    #[error("thinning did not converge within {cap} passes")]
    ThinningIterationCap { cap: usize },

    #[error("degenerate initial contact: re-grasp the object")]
    DegenerateInitialContact,

    #[error("frame index {got} does not follow previous index {last}")]
    NonMonotonicFrame { last: u64, got: u64 },

    #[error("no comparable frames between prediction and ground truth")]
    NoComparableFrames,

    #[error("ground-truth frame {0} missing from predicted track")]
    MissingFrame(u64),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape does not fit the canvas")]
    ShapeOutsideCanvas,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("unmatched inputs: {0}")]
    Unmatched(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
