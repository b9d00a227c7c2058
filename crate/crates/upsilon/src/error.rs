use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid {what}: {why}")]
    Invalid { what: String, why: String },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error(
        "quadrature did not converge over [{lo}, {hi}]: best estimate {estimate:e} with residual {residual:e} > tol {tol:e} after {subdivisions} subdivisions"
    )]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        estimate: f64,
        residual: f64,
        tol: f64,
        subdivisions: usize,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("inversion target {target} lies {side} the bracket value {bound} of f({at})")]
    TargetOutOfBracket {
        target: f64,
        side: &'static str,
        bound: f64,
        at: f64,
    },

    /// Input outside the mathematical domain of a mapping (e.g. a measure
    /// without finite log-moment handed to a mapping defined on I_log).
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn invalid(what: impl Into<String>, why: impl Into<String>) -> Self {
        Error::Invalid {
            what: what.into(),
            why: why.into(),
        }
    }

    /// Exit-code classification used by the CLI: domain violations are
    /// distinguishable from internal/numerical failures.
    pub fn is_domain_violation(&self) -> bool {
        matches!(
            self,
            Error::DomainViolation(_)
                | Error::Invalid { .. }
                | Error::DimensionMismatch(..)
                | Error::TargetOutOfBracket { .. }
                | Error::Unsupported(_)
        )
    }
}
