use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Newton initialization left the admissible cone.
    #[error("non-admissible start: {0}")]
    NonAdmissibleStart(String),

    /// No progress: the line search hit its halving floor, or the
    /// continuation step was refined to its limit without an admissible
    /// predictor. `residual` is NaN in the latter case.
    #[error("stagnation after {iteration} Newton iterations at continuation level {level}: {reason} (residual {residual:e})")]
    Stagnation { iteration: usize, level: f64, residual: f64, reason: String },

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("iteration cap of {iterations} reached with residual {residual:e}")]
    IterationCap { iterations: usize, residual: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for the typed failures raised by the Newton solver.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Stagnation { .. } | Error::LinearSolveFailure(_) | Error::IterationCap { .. }
        )
    }

    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonAdmissibleStart(_) => "non_admissible_start",
            Error::Stagnation { .. } => "stagnation",
            Error::LinearSolveFailure(_) => "linear_solve_failure",
            Error::IterationCap { .. } => "iteration_cap",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
