use thiserror::Error;

/// Errors raised by the library.
///
/// Failing certificates are not errors: a report with `pass = false` is a
/// valid outcome. Errors are reserved for malformed input, violated
/// preconditions and solvers that could not deliver a result.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("infeasible intersection: residual {residual:e} after {sweeps} sweeps")]
    Infeasible { residual: f64, sweeps: usize },

    #[error("non-finite {what} at point {point:?}")]
    NonFinite { what: &'static str, point: Vec<f64> },

    #[error("function is not declared coercive")]
    NotCoercive,

    #[error("function declares no Lipschitz constant for its gradient")]
    MissingLipschitz,

    #[error("Fermat residual {residual:e} exceeds {tolerance:e}")]
    FermatResidual { residual: f64, tolerance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid oracle needs {points} evaluations, budget is {budget}")]
    GridBudget { points: u128, budget: u128 },

    #[error("{stage} did not converge (residual {residual:e})")]
    NotConverged {
        stage: &'static str,
        residual: f64,
        /// Candidate assembled from the best iterates, if construction got that far.
        partial: Option<Box<crate::saddle::SaddleCandidate>>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
