use std::path::PathBuf;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("angle out of half-space: {0} deg")]
    AngleOutOfHalfSpace(f64),

    #[error("nonpositive reference distance: {0} m")]
    NonpositiveDistance(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty pattern")]
    EmptyPattern,

    #[error("zero incident amplitude")]
    ZeroAmplitude,

    #[error("target coincides with the RIS center")]
    CoincidentPoint,

    #[error("signal too short: {samples} samples, window needs {window}")]
    SignalTooShort { samples: usize, window: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
