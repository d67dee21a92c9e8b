use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("unsupported channel count {0}")]
    UnsupportedChannels(usize),

    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("image {width}x{height} is smaller than the {kernel}x{kernel} kernel")]
    ImageTooSmall {
        width: usize,
        height: usize,
        kernel: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate contingency table {0:?}: a margin is zero")]
    DegenerateTable([u64; 4]),

    #[error("need at least 2 points to build a displacement table, got {0}")]
    TooFewPoints(usize),

    #[error("duplicate point ({x}, {y})")]
    DuplicatePoint { x: usize, y: usize },

    #[error("point ({x}, {y}) outside {width}x{height} raster")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed raster: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: unsupported raster: {reason}")]
    Unsupported { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
