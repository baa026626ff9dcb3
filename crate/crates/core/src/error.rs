use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not reach its stopping criterion within the term budget.
    #[error("series did not converge after {terms} terms (partial sum {partial_sum})")]
    NonConvergence { partial_sum: f64, terms: usize },

    /// The requested argument lies outside the region the evaluator supports.
    #[error("argument {0} is outside the supported evaluation region")]
    Unsupported(String),

    /// An integrand or solution produced a NaN or infinite value.
    #[error("non-finite value {value} at draw {index} (sample {draw})")]
    NonFinite { index: usize, draw: String, value: f64 },

    /// The adaptive ODE integrator could not keep the step size above its floor.
    #[error("step size underflow at x = {x} (problem may be stiff)")]
    StepSizeUnderflow { x: f64 },

    /// Evaluation outside the range covered by a solution path.
    #[error("x = {x} is outside the path range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    /// Adaptive quadrature stopped without meeting the requested tolerance.
    #[error("quadrature failed: estimate {value}, achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { value: f64, achieved: f64, requested: f64 },

    /// The integral defining the requested quantity does not converge.
    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
