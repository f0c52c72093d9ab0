use thiserror::Error;

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Failures raised by the model, solvers and integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no acceptable damped Newton step at iteration {iteration} (residual {residual:e})")]
    DampingFailed { iteration: usize, residual: f64 },

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },

    #[error("time step {dt} min rejected: half-step discrepancy {discrepancy:e} exceeds {limit:e}")]
    StepTooCoarse { dt: f64, discrepancy: f64, limit: f64 },

    #[error("trajectory left the admissible domain at t = {t} min")]
    LeftDomain { t: f64 },

    #[error("trajectory too short: {0} samples remain after transient discard")]
    TrajectoryTooShort(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl ModelError {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
