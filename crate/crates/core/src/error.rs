use thiserror::Error;

/// Magnitude above which values are treated as having left the usable
/// binary64 range.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value, gradient or iterate exceeded [`OVERFLOW_LIMIT`].
    #[error("overflow{}: magnitude {magnitude:e} exceeds 1e300", iteration.map(|t| format!(" at iteration {t}")).unwrap_or_default())]
    Overflow { iteration: Option<u64>, magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("noise kind mismatch: {0}")]
    KindMismatch(String),

    /// Configuration error; `path` is a JSON pointer to the offending field.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn overflow(magnitude: f64) -> Self {
        Error::Overflow { iteration: None, magnitude }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// Attach an iteration index to an overflow error; other variants pass through.
    pub fn at_iteration(self, t: u64) -> Self {
        match self {
            Error::Overflow { magnitude, .. } => Error::Overflow { iteration: Some(t), magnitude },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
