use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: parse error: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: validation error: {message}")]
    Validation { line: u64, message: String },

    #[error("no observations")]
    NoObservations,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("posterior improper: {0}")]
    ImproperPosterior(String),

    #[error("improper prior: {0}")]
    ImproperPrior(String),

    #[error("evidence diverges under Jeffreys prior: {0}")]
    DivergentEvidence(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("moment problem infeasible: {0}")]
    Infeasible(String),

    #[error("maxent solver did not converge after {iterations} iterations (residuals {residuals:?})")]
    SolverNonConvergence { iterations: usize, residuals: [f64; 4] },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::NoObservations
                | Error::InvalidInput(_)
                | Error::ImproperPosterior(_)
                | Error::ImproperPrior(_)
                | Error::DivergentEvidence(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
