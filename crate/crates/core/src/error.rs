use thiserror::Error;

use crate::fit::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("loop failed to acquire lock: residual {residual:.4} rad exceeds {threshold:.4} rad")]
    Unlock { residual: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("bin {index} at {abscissa}: level does not exceed the circuit-noise floor")]
    Bin { index: usize, abscissa: f64 },

    #[error("fit did not converge after {iterations} iterations (best objective {})", best.objective)]
    NoConvergence { best: Box<FitResult>, iterations: usize },
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::Infeasible(_) => "infeasible",
            Error::Unlock { .. } => "unlock",
            Error::Config(_) => "config",
            Error::Bin { .. } => "bin",
            Error::NoConvergence { .. } => "no_convergence",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
