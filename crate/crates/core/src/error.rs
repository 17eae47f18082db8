use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("failed to encode {path}: {message}")]
    Encode { path: PathBuf, message: String },

    #[error("non-finite sample at pixel {pixel} (x={x}, y={y}, channel {channel})")]
    NonFiniteSample {
        pixel: usize,
        x: usize,
        y: usize,
        channel: usize,
    },

    #[error("unsupported channel count {0}; expected 1 or 3")]
    ChannelCount(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("not enough samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("timestamp {0} outside the supported 1900-2100 range")]
    TimestampOutOfRange(String),

    #[error("sky dome has no alignment gain")]
    UnalignedDome,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
