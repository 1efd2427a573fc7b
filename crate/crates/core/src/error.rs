use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps [`Error::Config`] and [`Error::Io`] to exit code 1 and every
/// numerical or regime failure to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the formula it feeds.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spiked-model formula was evaluated on the wrong side of the
    /// phase-transition point.
    #[error("regime error: {0}")]
    Regime(String),

    /// Mismatched or insufficient dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    /// The input carries no usable signal (rank zero, all-zero buffer).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Not enough Monte Carlo trials to resolve the requested quantity.
    #[error("precision error: {0}")]
    Precision(String),

    /// Invalid configuration. `line` is 1-based when the key came from a file.
    #[error("configuration error{}: {message}", fmt_location(.key, .line))]
    Config {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },

    /// Malformed external data (raw I/Q files, CSV tables).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_location(key: &Option<String>, line: &Option<usize>) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!(" at line {l} (key `{k}`)"),
        (Some(k), None) => format!(" (key `{k}`)"),
        (None, Some(l)) => format!(" at line {l}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: Some(key.into()),
            line: None,
            message: message.into(),
        }
    }

    /// True for errors caused by the user's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Io(_) | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
