use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A linear problem posed by the caller has no solution.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// An iterative numerical procedure failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A computation exceeded its resource budget. `best` carries the best
    /// candidate found before the budget ran out, when one exists.
    #[error("resource budget exceeded: {msg}")]
    ResourceExceeded {
        msg: String,
        best: Option<(Vec<f64>, f64)>,
    },

    /// The cohomological equation has no primitive: the invariant
    /// distribution does not vanish on the data. Carries the obstruction
    /// value `D(f)`.
    #[error("cohomological obstruction: D(f) = {obstruction:e}")]
    Obstruction { obstruction: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
