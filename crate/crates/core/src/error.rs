use thiserror::Error;

use crate::chain::ChainState;

/// Errors from the single-cell model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// `p == q`: the band length is independent of the lever angle, so the
    /// energy extremum direction is undefined.
    #[error("degenerate anchors: p == q, every angle is an energy extremum")]
    DegenerateAnchors,

    /// Angle too close to the vertical for the force conversion
    /// `F = (dE/dtheta) / (r cos theta)` to be meaningful.
    #[error("angle {theta} rad is within tolerance of +/-pi/2 where the vertical force is singular")]
    ForceSingularity { theta: f64 },

    /// Curve sampling needs at least the two endpoint samples.
    #[error("sample count must be at least 2, got {n}")]
    InvalidSampleCount { n: usize },

    /// A configuration field violates its documented range.
    #[error("invalid config: {field} {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: String,
    },
}

/// Errors from chain continuation and the protocols built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error(transparent)]
    Model(#[from] ModelError),

    /// Requested displacement lies outside the reachable `[0, 2 u_max]` span.
    #[error("displacement out of range: u = {u} mm, reachable span is [0, {max} mm]")]
    DisplacementOutOfRange { u: f64, max: f64 },

    /// The local descent did not satisfy the gradient tolerance within the
    /// iteration budget. Carries the last iterate.
    #[error("descent did not converge at u = {u} mm (last iterate theta_in = {last_theta_in} rad)")]
    NonConvergence { u: f64, last_theta_in: f64 },

    /// A displacement increment could not be realised with the inner unit
    /// friction-locked. Unreachable for protocols inside `[0, 2 u_max]`,
    /// where the prescribed displacement always dominates friction.
    #[error("stalled step at u = {u} mm: inner unit friction-locked and outer unit saturated")]
    Stalled { u: f64, state: ChainState },

    /// A protocol definition violates its invariants.
    #[error("invalid protocol: {reason}")]
    InvalidProtocol { reason: String },

    /// A robot/environment scenario violates its invariants.
    #[error("invalid scenario: {reason}")]
    InvalidScenario { reason: String },
}
