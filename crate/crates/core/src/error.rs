use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented range. `field` is a dotted path.
    #[error("{field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// A requested frequency does not fit under the grid's Nyquist limit.
    #[error("{what} = {frequency:.6e} Hz is not below the Nyquist frequency {nyquist:.6e} Hz")]
    Nyquist {
        what: String,
        frequency: f64,
        nyquist: f64,
    },

    /// Two or more individually valid parameters contradict each other.
    #[error("{}: {reason}", fields.join(", "))]
    Inconsistent { fields: Vec<String>, reason: String },

    #[error("sample rate mismatch: trace at {trace:.6e} Hz, filter designed for {filter:.6e} Hz")]
    SampleRateMismatch { trace: f64, filter: f64 },

    #[error("trace too short: {len} samples, need at least {needed}")]
    TraceTooShort { len: usize, needed: usize },

    #[error("empty trace")]
    EmptyTrace,

    /// The result is not finite or an iterative routine did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
