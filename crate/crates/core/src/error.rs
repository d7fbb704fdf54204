use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("empty audio data")]
    EmptyAudio,

    #[error("clip too short: {len} samples, frame length {frame_len}")]
    ClipTooShort { len: usize, frame_len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape error: {op}: expected {expected}, got {actual}")]
    Shape {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite gradient at parameter index {index}")]
    NonFiniteGradient { index: usize },

    #[error("unknown config {name:?} (valid: {valid})")]
    UnknownConfig { name: String, valid: String },

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("truncated checkpoint payload")]
    Truncated,

    #[error("checkpoint checksum mismatch")]
    Checksum,

    #[error("checkpoint does not match config {config}: {detail}")]
    ConfigMismatch { config: String, detail: String },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("missing audio file {0}")]
    MissingFile(PathBuf),

    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::Shape {
            op,
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
