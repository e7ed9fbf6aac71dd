use thiserror::Error;

/// Errors raised by the reconstruction pipeline and its IO layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Malformed Touchstone or CSV text. `line` is 1-based when known.
    #[error("format error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<usize>, msg: String },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("admissibility error: {0}")]
    Admissibility(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("numerical divergence at iteration {iteration}: {msg}")]
    NumericalDivergence { iteration: usize, msg: String },
}

impl Error {
    pub(crate) fn format(line: impl Into<Option<usize>>, msg: impl Into<String>) -> Self {
        Error::Format {
            line: line.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
