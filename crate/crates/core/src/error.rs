//! Error type shared by every planner module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A field failed its domain constraint.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The general short-circuiting formula is undefined when the mix has no
    /// depot-anchored stops; the caller must use the closed-form limit.
    #[error("stop mix has n_p = n_d = 0; use short_circuit_factor_limit instead")]
    LimitRequired,

    /// An average over zero orders was requested.
    #[error("{quantity} is undefined for zero orders")]
    UndefinedAverage { quantity: &'static str },

    #[error("{0} is not applicable to this scenario")]
    NotApplicable(String),

    #[error("instance has {orders} orders; the exact solver handles at most {max} (use the heuristic)")]
    InstanceTooLarge { orders: usize, max: usize },

    #[error(
        "finite-difference check failed for {parameter}: analytic {analytic:e}, numeric {numeric:e}, relative residual {residual:e}"
    )]
    FiniteDifference {
        parameter: String,
        analytic: f64,
        numeric: f64,
        residual: f64,
    },

    #[error("sweep grid point {index} ({parameter} = {value}) is invalid: {source}")]
    GridPoint {
        index: usize,
        parameter: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown format '{0}' (expected json, csv or text)")]
    UnknownFormat(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Fails with a validation error unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn ensure_nonnegative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be >= 0, got {value}")))
    }
}
