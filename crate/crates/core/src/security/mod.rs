//! Frequency-security indicators, critical nodal inertia and security indices.

mod critical;
mod extremum;
mod index;
mod indicators;

pub use critical::{critical_inertia, critical_inertia_with, CriticalInertia, CriticalInertiaOptions};
pub use extremum::{
    nadir_time_fault_on, nadir_time_post_fault, nadir_time_recovery, recovery_taylor_coefficients,
    taylor_seed,
};
pub use index::{security_index, IndicatorReport, NodeIndicatorReport, SecurityIndex, Verdict};
pub use indicators::{
    frequency_nadir, frequency_zenith, indicators, max_rocof, sensitivity_nadir, sensitivity_rocof,
    FrequencyExtremum, RocofEstimates, SecurityIndicators, SensitivityVector, DEFAULT_SENSITIVITY_STEP,
    ROCOF_WINDOW,
};

use serde::{Deserialize, Serialize};

use crate::enf::{EnfError, OMEGA_0};

#[derive(Debug, thiserror::Error)]
pub enum SecurityError {
    #[error(transparent)]
    Enf(#[from] EnfError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("relative step {0} outside [1e-6, 1e-2]")]
    InvalidStep(f64),
    #[error("nadir {nadir} pu at H = {h_max} s is still below the threshold {omega_th} pu")]
    Bracket { h_max: f64, nadir: f64, omega_th: f64 },
    #[error("no underdamped inertia in the search bracket [{lo}, {hi}] s")]
    EmptyBracket { lo: f64, hi: f64 },
    #[error("nadir is not monotone in H: {nadir_low} pu at {h_low} s but {nadir_high} pu at {h_high} s")]
    NonMonotonic {
        h_low: f64,
        h_high: f64,
        nadir_low: f64,
        nadir_high: f64,
    },
    #[error("node sets differ: {0}")]
    KeyMismatch(String),
}

/// Which RoCoF expression turns the RoCoF limit into an inertia limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RocofConvention {
    /// `R_max = ΔP/H̄`, the published expression.
    #[default]
    Published,
    /// `R_max = ΔP/(2H̄)`, the initial slope of the model.
    OdeConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityThresholds {
    /// pu/s
    pub r_th: f64,
    /// pu
    pub omega_th: f64,
}

impl Default for SecurityThresholds {
    fn default() -> Self {
        Self {
            r_th: 0.0167,
            omega_th: 0.99,
        }
    }
}

impl SecurityThresholds {
    pub fn new(r_th: f64, omega_th: f64) -> Result<Self, SecurityError> {
        let th = Self { r_th, omega_th };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        if !(self.r_th > 0.0 && self.r_th.is_finite()) {
            return Err(SecurityError::InvalidThresholds(format!(
                "r_th = {} must be positive",
                self.r_th
            )));
        }
        if !(self.omega_th < OMEGA_0 && self.omega_th > 0.0) {
            return Err(SecurityError::InvalidThresholds(format!(
                "omega_th = {} must lie in (0, {OMEGA_0})",
                self.omega_th
            )));
        }
        Ok(())
    }
}
