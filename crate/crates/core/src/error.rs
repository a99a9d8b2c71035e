use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent configuration, frame labels or parameter ranges.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("timestamp {t_us} outside pose range [{first_us}, {last_us}]")]
    Extrapolation {
        t_us: i64,
        first_us: i64,
        last_us: i64,
    },

    #[error("non-monotonic timestamp: {current_us} does not follow {previous_us}")]
    NonMonotonic { previous_us: i64, current_us: i64 },

    #[error("sliding window not full: {frames} of {window} frames accumulated")]
    WindowNotFull { frames: usize, window: usize },

    #[error("grid spec mismatch")]
    GridMismatch,

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Bad invocation: unknown scenario, missing required input file.
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
