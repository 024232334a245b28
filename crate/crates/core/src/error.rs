use thiserror::Error;

/// Errors raised by the geometry, curvature, geodesic and quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    /// A point or parameter lies outside the region where the optical metric is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The ray fell below the capture radius instead of escaping.
    #[error("ray captured: r = {r} fell below r_min = {r_min} at parameter {parameter}")]
    Capture { r: f64, r_min: f64, parameter: f64 },

    /// The adaptive integrator could not meet its tolerance.
    #[error("step failure at parameter {parameter}: step size {step} underflowed")]
    StepFailure { parameter: f64, step: f64 },

    /// The outgoing asymptote was not reached within the parameter budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Adaptive quadrature ran out of subdivisions.
    #[error("tolerance not met: estimate {estimate:e} exceeds requested {requested:e} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        estimate: f64,
        requested: f64,
        subdivisions: usize,
    },

    /// A curve's tangent vanished where its geodesic curvature was requested.
    #[error("degenerate tangent: speed {0:e} is below 1e-12")]
    DegenerateTangent(f64),

    /// Malformed input that is not a geometric domain violation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
