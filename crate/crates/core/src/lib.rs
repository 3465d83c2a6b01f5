//! Nodal frequency-security toolkit.
//!
//! * [`enf`] closed-form effective nodal frequency model
//! * [`sim`] reference integrator for the time-varying nodal model
//! * [`fitting`] data-based identification of effective parameters
//! * [`security`] frequency-security indicators, critical inertia, security index
//! * [`assessment`] offline table and online assessment
//! * [`demo`] bundled five-node example system

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assessment;
pub mod demo;
pub mod enf;
pub mod fitting;
pub mod security;
pub mod sim;

pub use enf::{DisturbanceScenario, EffectiveParams, EnfResponse, TemporaryFault, Trajectory, OMEGA_0};
