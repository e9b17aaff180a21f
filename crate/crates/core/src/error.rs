use thiserror::Error;

/// Errors raised by the beamforming toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was handed a geometry of the wrong kind, or a capture whose
    /// channel count disagrees with its geometry.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("out of range: {0}")]
    Range(String),
    /// Malformed or unsupported input data (WAV files).
    #[error("format error: {0}")]
    Format(String),
    /// Malformed experiment configuration (flags or config file).
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 3 for I/O and file-format problems, 2 for
    /// everything caused by the requested configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Format(_) | Error::Json(_) => 3,
            _ => 2,
        }
    }
}
