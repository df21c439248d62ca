use thiserror::Error;

/// Errors reported by the estimators, solvers and file loaders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate input: {message}")]
    DegenerateInput {
        message: String,
        /// Directions (in input coordinates) spanning the detected null space.
        null_directions: Vec<Vec<f64>>,
    },

    #[error("empty accumulator: {0}")]
    EmptyAccumulator(String),

    #[error("subspace has no orthogonal complement (n = m = {0})")]
    EmptyComplement(usize),

    #[error("infeasible reduced coordinates: minimum box violation {max_violation:e}")]
    Infeasible {
        /// Smallest achievable `max_i |x_i| - 1` over the feasible slice; positive when infeasible.
        max_violation: f64,
    },

    #[error("division guard: {0}")]
    DivisionGuard(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
