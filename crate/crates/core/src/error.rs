use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error(
        "physicality violated at t = {time}: trace error {trace_error:e}, min eigenvalue {min_eigenvalue:e}"
    )]
    Physicality {
        time: f64,
        trace_error: f64,
        min_eigenvalue: f64,
    },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("unknown preset `{0}` (expected fig2, fig3, fig4, fig5 or fig6)")]
    UnknownPreset(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical run itself (as opposed to bad input).
    pub fn is_runtime_failure(&self) -> bool {
        matches!(
            self,
            Error::Physicality { .. } | Error::StepUnderflow { .. } | Error::NonFinite { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
