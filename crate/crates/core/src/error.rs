use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "point-spread function is not normalized: |∫ψ² - 1| = {residual:e} exceeds {tolerance:e}"
    )]
    Normalization { residual: f64, tolerance: f64 },

    #[error("quadrature did not converge after {refinements} refinements (last change {change:e}, tolerance {tolerance:e})")]
    Convergence {
        refinements: usize,
        change: f64,
        tolerance: f64,
    },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("mode cutoff {cutoff} leaves truncated mass {mass:e} (need < {target:e})")]
    Cutoff {
        cutoff: usize,
        mass: f64,
        target: f64,
    },

    #[error(
        "outcome {index} has vanishing probability {probability:e} but derivative {derivative:e}"
    )]
    DegenerateOutcome {
        index: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("Fisher information exceeds its quantum limit (regret {what} = {value:e})")]
    BoundViolation { what: &'static str, value: f64 },

    #[error("error budget is below the Cramér-Rao bound: gamma_{index} = {gamma}")]
    InfeasibleBudget { index: usize, gamma: f64 },

    #[error("psf file line {line}: {message}")]
    PsfFile { line: usize, message: String },
}

impl Error {
    /// True for failures of numerical convergence or consistency, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Cutoff { .. }
                | Error::DegenerateOutcome { .. }
                | Error::BoundViolation { .. }
                | Error::DegenerateState(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
