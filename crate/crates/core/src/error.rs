//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid shooting configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed profile: {0}")]
    MalformedProfile(String),

    /// The adaptive integrator drove the step size below the resolvable
    /// floor; the radius reached is reported so callers can localize the
    /// blow-up or stiff region.
    #[error("step size underflow at r = {radius:e}; trajectory too stiff to continue")]
    Stiffness { radius: f64 },

    #[error("no high-side trajectory found for initial heights up to {limit}")]
    NoGroundState { limit: f64 },

    #[error("shooting dichotomy violated: {0}")]
    DichotomyViolation(String),

    #[error("sign analysis found more than one interior sign change")]
    MultipleRoots,

    #[error("operation requires {required}, but parameters give {found}")]
    Regime { required: String, found: String },

    #[error("inconsistent parameters: {0}")]
    InconsistentParameters(String),

    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    #[error("nonlinearity carries no additive split, operation unavailable")]
    MissingSplit,

    #[error("unsupported coupling: {0}")]
    UnsupportedCoupling(String),

    #[error("tail window too short: {0}")]
    InsufficientTail(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    /// True for failures of numerical procedures (as opposed to rejected
    /// inputs); the CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Stiffness { .. }
                | Error::NoGroundState { .. }
                | Error::DichotomyViolation(_)
                | Error::MultipleRoots
                | Error::InsufficientTail(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
