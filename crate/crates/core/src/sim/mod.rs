//! Reference simulation of the time-varying nodal model.
//!
//! Stands in for PMU recordings: the effective parameters of a node are
//! modulated by sinusoids and optional noise, the two-state model is
//! integrated with fixed-step RK4, and measurement noise can be added on top.

mod integrator;
mod modulation;
mod topology;

pub use integrator::{
    settling_horizon, simulate_node, simulate_states, simulate_with, synthesize_pmu, SimSettings, SimState,
    INSTABILITY_LIMIT, MAX_STEP,
};
pub use modulation::{ParamModulation, ParameterModulation, SineTerm};
pub use topology::{Line, NetworkTopology, TopologyNode};

use crate::enf::EnfError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("parameter `{parameter}` is {value} at t = {t} s")]
    NonPositiveParameter {
        parameter: &'static str,
        t: f64,
        value: f64,
    },
    #[error("frequency deviation {deviation} pu exceeds the stability limit at t = {t} s")]
    Unstable { t: f64, deviation: f64 },
    #[error("invalid step {0} s (must be in (0, 1e-3] and divide the record interval)")]
    InvalidStep(f64),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("topology: {0}")]
    Topology(String),
    #[error(transparent)]
    Enf(#[from] EnfError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
