//! Effective nodal frequency (ENF) model.
//!
//! A node is described by constant effective parameters (inertia, damping,
//! primary regulation gain and its time constant). Its frequency deviation
//! obeys the two-state model
//!
//! ```text
//! 2H·dΔω/dt = ΔP(t) − D·Δω − g
//!  τ·dg/dt  = K·Δω − g
//! ```
//!
//! whose response to a step or to the four-phase profile of a cleared fault
//! is available in closed form. Only the underdamped regime is supported.

mod params;
mod scenario;
mod solution;
mod trajectory;

pub use params::EffectiveParams;
pub use scenario::{disturbance_power, DisturbanceKind, DisturbanceScenario, Phase, TemporaryFault};
pub use solution::{
    eval_derivative, eval_permanent, eval_temporary, phase_constants, published_a1, BoundaryState, Branch,
    ClosedFormConstants, EnfResponse,
};
pub use trajectory::{Sample, Trajectory};

/// Nominal frequency, pu.
pub const OMEGA_0: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum EnfError {
    #[error("parameters must be finite and strictly positive: {0:?}")]
    NonPositiveParams(EffectiveParams),
    #[error("parameters are not underdamped (discriminant {discriminant:.6e}): {params:?}")]
    NotUnderdamped {
        params: EffectiveParams,
        discriminant: f64,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
