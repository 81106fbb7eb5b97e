//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate parameterization: zero speed")]
    DegenerateParameterization,

    #[error("degenerate line: direction vector is zero")]
    DegenerateLine,

    #[error("invalid potential exponent {0}: must be finite and nonzero")]
    InvalidExponent(f64),

    #[error("exponent a = -2 is scaling-degenerate; refusing to solve")]
    ScalingDegenerate,

    #[error("collision at t = {time}: pair distance {distance:e} below floor")]
    Collision { time: f64, distance: f64 },

    #[error("center of mass {offset:e} away from origin (tolerance {tolerance:e})")]
    CenterOfMass { offset: f64, tolerance: f64 },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature grid of {grid} points aliases {modes} modes (need grid > 2 * modes)")]
    Aliasing { grid: usize, modes: usize },

    #[error("loop approaches collision: min pair distance {distance:e} at t = {time}")]
    CollisionApproach { time: f64, distance: f64 },

    #[error("minimizer did not converge in {iterations} iterations (|grad| = {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("line search failed at iteration {iteration}: {reason}")]
    LineSearch { iteration: usize, reason: String },

    #[error("shooting Jacobian is singular (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("shooting diverged after {iterations} iterations (max residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("seam mismatch {mismatch:e} at t = {time} exceeds tolerance {tolerance:e}")]
    SeamMismatch { time: f64, mismatch: f64, tolerance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateParameterization
                | Error::Collision { .. }
                | Error::CenterOfMass { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::TooManySteps(_)
                | Error::CollisionApproach { .. }
                | Error::NotConverged { .. }
                | Error::LineSearch { .. }
                | Error::SingularJacobian { .. }
                | Error::Divergence { .. }
                | Error::SeamMismatch { .. }
        )
    }
}
