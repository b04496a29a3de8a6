use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature tolerance not met: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A power-law fit was refused.
    #[error("low-confidence exponent fit ({reason}): slope {slope:.4}, R^2 {r_squared:.4}, window sensitivity {window_sensitivity:.4}")]
    LowConfidence {
        reason: &'static str,
        slope: f64,
        r_squared: f64,
        window_sensitivity: f64,
    },

    /// A failure while evaluating one grid point of a sweep.
    #[error("grid point {index} (g = {g}): {source}")]
    Sweep {
        index: usize,
        g: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
