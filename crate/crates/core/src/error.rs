use thiserror::Error;

/// Errors raised by the evaluation, bracket, and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Non-finite input, an origin state, a non-positive radius, or a
    /// violated parameter precondition.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// The evaluation point lies on (or within the guard distance of) a
    /// singular ray or axis of the potential.
    #[error("singular point: {what} (clearance {clearance:.3e})")]
    Singularity { what: &'static str, clearance: f64 },

    /// The finite-difference stencil would touch a singular set.
    #[error("stencil reaches a singular set: clearance {clearance:.3e} < required {required:.3e}")]
    Stencil { clearance: f64, required: f64 },

    /// `J2 <= 0`, so the square root in the polar factors is undefined.
    #[error("separation constant J2 = {0:.6e} is not positive")]
    NonPositiveJ2(f64),

    /// The observable is not defined for this potential family.
    #[error("observable `{observable}` is not defined for the {family} family")]
    Unsupported {
        observable: &'static str,
        family: &'static str,
    },

    /// An integration step produced a non-finite state.
    #[error("integration produced a non-finite state at t = {0}")]
    Integration(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
