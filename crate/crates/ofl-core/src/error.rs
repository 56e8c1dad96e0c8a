use std::fmt;
use std::io;
use std::path::PathBuf;

/// A type alias for `Result<T, Error>`.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by instance construction, ingestion and the harness.
#[derive(Debug)]
pub enum Error {
    /// An index (point, facility, demand, vertex) is out of range.
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },
    /// Input data violates a structural requirement (dimension mismatch,
    /// disconnected graph, nonpositive cost, misaligned streams, ...).
    Validation(String),
    /// A file row failed to parse.
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    /// An operation was invoked with an unusable configuration
    /// (empty facility universe, enumeration bound exceeded, bad split, ...).
    Config(String),
    /// An I/O failure, with the path that was being read or written.
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { kind, index, len } => {
                write!(f, "{} index {} out of range (len {})", kind, index, len)
            }
            Error::Validation(msg) => write!(f, "invalid input: {}", msg),
            Error::Parse {
                path,
                line,
                message,
            } => write!(f, "{}:{}: {}", path.display(), line, message),
            Error::Config(msg) => write!(f, "bad configuration: {}", msg),
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
