use thiserror::Error;

/// Errors raised by parameter validation, sampling, beamforming and the
/// analytic evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates one of the system constraints.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    /// A user region produced no users for this deployment.
    #[error("deployment has no users in the {region} region")]
    EmptyRegion { region: &'static str },

    /// A channel realization made a beamformer undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate} with error {error:e} (tolerance {tolerance:e})")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    /// A special function was called outside its domain.
    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// A formula produced a probability outside [0, 1].
    #[error("{method} produced out-of-range probability {value}")]
    OutOfRange { method: &'static str, value: f64 },

    /// Sweep axis name is not a parameter.
    #[error("unknown sweep axis `{name}`; valid axes: {}", valid.join(", "))]
    UnknownAxis {
        name: String,
        valid: Vec<&'static str>,
    },

    /// Resampling gave up after too many attempts.
    #[error("trial {trial}: no valid deployment after {attempts} attempts ({last})")]
    ResampleExhausted {
        trial: u64,
        attempts: u32,
        last: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        field,
        reason: reason.into(),
    }
}
