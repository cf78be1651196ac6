use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("profile evaluated at rho = {rho} outside its window [{lo}, {hi}]")]
    Extrapolation { rho: f64, lo: f64, hi: f64 },

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("tail not decayed at r_max = {r_max}: probe magnitude {probe:e} exceeds {limit:e}")]
    Truncation { r_max: f64, probe: f64, limit: f64 },

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("estimated cost {estimated:e} evaluations exceeds budget {budget:e}")]
    CostBudget { estimated: f64, budget: f64 },

    #[error("insufficient resolution: {message} (fit residual {residual:e})")]
    InsufficientResolution { message: String, residual: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that come from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Extrapolation { .. }
                | Error::InvalidWindow(_)
                | Error::Truncation { .. }
                | Error::Convergence(_)
                | Error::InsufficientResolution { .. }
                | Error::NonFinite(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
