use serde::{Deserialize, Serialize};

use super::EnfError;

/// Cleared-fault disturbance with the four-phase power profile
/// (pre-fault, fault-on, ramp recovery, post-fault).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporaryFault {
    /// Fault inception, s.
    pub t_f: f64,
    /// Fault clearing, s.
    pub t_c: f64,
    /// Grid-following power recovery ramp, pu/s.
    pub r_p: f64,
    /// Pre-fault grid-following active power, pu.
    pub p_gfl0: f64,
    /// Pre-fault load, pu.
    pub p_load0: f64,
    /// Retained voltage during the fault, pu.
    pub u_f: f64,
    /// Constant-impedance load fraction.
    pub a: f64,
    /// Constant-current load fraction.
    pub b: f64,
    /// Constant-power load fraction.
    pub c: f64,
}

impl TemporaryFault {
    /// End of the recovery ramp, `t_c + 1/r_p`.
    pub fn t_r(&self) -> f64 {
        self.t_c + 1.0 / self.r_p
    }

    /// Constant fault-on imbalance `−P_GFL0 + (1 − a·U² − b·U − c)·P_load0`.
    pub fn fault_power(&self) -> f64 {
        let u = self.u_f;
        let load_drop = (1.0 - self.a * u * u - self.b * u - self.c) * self.p_load0;
        -self.p_gfl0 + load_drop
    }

    /// Recovery-phase imbalance `(r_p·(t − t_c) − 1)·P_GFL0`.
    pub fn recovery_power(&self, t: f64) -> f64 {
        (self.r_p * (t - self.t_c) - 1.0) * self.p_gfl0
    }

    pub fn validate(&self) -> Result<(), EnfError> {
        let finite = [
            self.t_f,
            self.t_c,
            self.r_p,
            self.p_gfl0,
            self.p_load0,
            self.u_f,
            self.a,
            self.b,
            self.c,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(EnfError::InvalidScenario("non-finite field".into()));
        }
        if !(self.t_f >= 0.0 && self.t_f < self.t_c) {
            return Err(EnfError::InvalidScenario(format!(
                "fault times must satisfy 0 <= t_f < t_c (t_f={}, t_c={})",
                self.t_f, self.t_c
            )));
        }
        if self.r_p <= 0.0 {
            return Err(EnfError::InvalidScenario(format!(
                "recovery ramp must be positive (r_p={})",
                self.r_p
            )));
        }
        if !(0.0..1.0).contains(&self.u_f) {
            return Err(EnfError::InvalidScenario(format!(
                "fault voltage must lie in [0, 1) (u_f={})",
                self.u_f
            )));
        }
        if self.a < 0.0 || self.b < 0.0 || self.c < 0.0 {
            return Err(EnfError::InvalidScenario(
                "load fractions must be non-negative".into(),
            ));
        }
        if (self.a + self.b + self.c - 1.0).abs() > 1e-9 {
            return Err(EnfError::InvalidScenario(format!(
                "load fractions must sum to 1 (a+b+c={})",
                self.a + self.b + self.c
            )));
        }
        Ok(())
    }
}

/// Either a permanent power step or a temporary (cleared) fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceScenario {
    Permanent {
        /// Power step ΔP_i, pu (negative for a generation loss).
        dp: f64,
        /// Step instant, s.
        #[serde(default)]
        t_f: f64,
    },
    Temporary(TemporaryFault),
}

/// Phase of the disturbance profile. Boundaries belong to the earlier phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PreFault,
    FaultOn,
    Recovery,
    PostFault,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    Permanent,
    Temporary,
}

impl DisturbanceScenario {
    pub fn permanent(dp: f64) -> Self {
        Self::Permanent { dp, t_f: 0.0 }
    }

    pub fn kind(&self) -> DisturbanceKind {
        match self {
            Self::Permanent { .. } => DisturbanceKind::Permanent,
            Self::Temporary(_) => DisturbanceKind::Temporary,
        }
    }

    pub fn onset(&self) -> f64 {
        match self {
            Self::Permanent { t_f, .. } => *t_f,
            Self::Temporary(f) => f.t_f,
        }
    }

    /// Imbalance right after the disturbance starts (ΔP_i or ΔP_i2).
    pub fn initial_power(&self) -> f64 {
        match self {
            Self::Permanent { dp, .. } => *dp,
            Self::Temporary(f) => f.fault_power(),
        }
    }

    /// Instants where the forcing changes form.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Permanent { t_f, .. } => vec![*t_f],
            Self::Temporary(f) => vec![f.t_f, f.t_c, f.t_r()],
        }
    }

    pub fn as_temporary(&self) -> Option<&TemporaryFault> {
        match self {
            Self::Temporary(f) => Some(f),
            Self::Permanent { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), EnfError> {
        match self {
            Self::Permanent { dp, t_f } => {
                if !dp.is_finite() || !t_f.is_finite() || *t_f < 0.0 {
                    return Err(EnfError::InvalidScenario(format!(
                        "permanent step needs finite dp and t_f >= 0 (dp={dp}, t_f={t_f})"
                    )));
                }
                Ok(())
            }
            Self::Temporary(f) => f.validate(),
        }
    }

    pub fn phase_at(&self, t: f64) -> Phase {
        match self {
            Self::Permanent { t_f, .. } => {
                if t <= *t_f {
                    Phase::PreFault
                } else {
                    Phase::FaultOn
                }
            }
            Self::Temporary(f) => {
                if t <= f.t_f {
                    Phase::PreFault
                } else if t <= f.t_c {
                    Phase::FaultOn
                } else if t <= f.t_r() {
                    Phase::Recovery
                } else {
                    Phase::PostFault
                }
            }
        }
    }

    /// Forcing expression of `phase` evaluated at `t`, without checking that
    /// `t` lies in that phase. Integrators use this to take one-sided limits
    /// at the breakpoints.
    pub fn power_in_phase(&self, phase: Phase, t: f64) -> f64 {
        match (self, phase) {
            (_, Phase::PreFault) => 0.0,
            (Self::Permanent { dp, .. }, _) => *dp,
            (Self::Temporary(f), Phase::FaultOn) => f.fault_power(),
            (Self::Temporary(f), Phase::Recovery) => f.recovery_power(t),
            (Self::Temporary(_), Phase::PostFault) => 0.0,
        }
    }
}

/// Power imbalance ΔP_i(t) seen by every node, pu.
pub fn disturbance_power(scn: &DisturbanceScenario, t: f64) -> f64 {
    scn.power_in_phase(scn.phase_at(t), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fault() -> TemporaryFault {
        TemporaryFault {
            t_f: 1.0,
            t_c: 1.2,
            r_p: 2.0,
            p_gfl0: 0.5,
            p_load0: 1.0,
            u_f: 0.5,
            a: 1.0,
            b: 0.0,
            c: 0.0,
        }
    }

    #[test]
    fn fault_on_power_matches_hand_value() {
        let scn = DisturbanceScenario::Temporary(fault());
        // −0.5 + (1 − 0.25)·1.0
        assert!((disturbance_power(&scn, 1.1) - 0.25).abs() < 1e-15);
        assert!((disturbance_power(&scn, 1.2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn profile_edges() {
        let f = fault();
        let scn = DisturbanceScenario::Temporary(f);
        assert_eq!(disturbance_power(&scn, 0.0), 0.0);
        assert_eq!(disturbance_power(&scn, 1.0), 0.0);
        assert_eq!(f.t_r(), 1.7);
        assert_eq!(disturbance_power(&scn, f.t_r()), 0.0);
        assert_eq!(disturbance_power(&scn, 5.0), 0.0);
        // just after clearing the load is back and the GFL output is still zero
        assert!((disturbance_power(&scn, 1.2 + 1e-12) + 0.5).abs() < 1e-9);
        assert!((disturbance_power(&scn, 1.45) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn permanent_step() {
        let scn = DisturbanceScenario::Permanent { dp: -0.1, t_f: 0.5 };
        assert_eq!(disturbance_power(&scn, 0.5), 0.0);
        assert_eq!(disturbance_power(&scn, 0.6), -0.1);
        assert_eq!(disturbance_power(&scn, 100.0), -0.1);
    }

    #[test]
    fn validation() {
        assert!(fault().validate().is_ok());
        let mut f = fault();
        f.a = 0.5;
        assert!(f.validate().is_err());
        let mut f = fault();
        f.t_c = f.t_f;
        assert!(f.validate().is_err());
        let mut f = fault();
        f.r_p = 0.0;
        assert!(f.validate().is_err());
        let mut f = fault();
        f.u_f = 1.0;
        assert!(f.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let scn = DisturbanceScenario::Temporary(fault());
        let v: serde_json::Value = serde_json::to_value(scn).unwrap();
        assert_eq!(v["kind"], "temporary");
        assert_eq!(v["p_gfl0"], 0.5);
        let back: DisturbanceScenario = serde_json::from_value(v).unwrap();
        assert_eq!(back, scn);
        let p: DisturbanceScenario = serde_json::from_str(r#"{"kind":"permanent","dp":-0.2}"#).unwrap();
        assert_eq!(p, DisturbanceScenario::permanent(-0.2));
    }
}
