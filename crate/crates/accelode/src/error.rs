use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum AccelError {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Fixed-point iteration did not reach the requested tolerance.
    ///
    /// Signals a step size too close to 1 or an ill-conditioned objective.
    #[error("fixed-point iteration did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NonConvergence { max_iter: usize, residual: f64 },

    /// Radial bisection for a level-set boundary failed to bracket a root,
    /// which signals a non-convex input.
    #[error("level-set bisection failed to bracket the boundary: {0}")]
    LevelSet(String),

    /// A rate was requested for an observable that is identically zero.
    #[error("rate is undefined: {0}")]
    UndefinedRate(String),

    /// Not enough usable samples for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed input while parsing a contour CSV.
    #[error("csv parse error: {0}")]
    CsvParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AccelError>;

impl AccelError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AccelError::InvalidArgument(msg.into())
    }
}
