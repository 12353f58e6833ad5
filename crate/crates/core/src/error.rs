use thiserror::Error;

/// Errors raised by parameter validation, the kernel evaluators, the solver
/// and the verification checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{quantity} is not defined at {detail}")]
    Domain {
        quantity: &'static str,
        detail: String,
    },

    #[error("computational domain too small: half-width {half_width} < required {required}")]
    DomainTooSmall { half_width: f64, required: f64 },

    #[error("singular tridiagonal system at row {0}")]
    SingularSystem(usize),

    #[error("verification input mismatch: {0}")]
    Mismatch(String),

    #[error("rate fit rejected: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        key,
        reason: reason.into(),
    }
}

pub(crate) fn domain(quantity: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        quantity,
        detail: detail.into(),
    }
}
