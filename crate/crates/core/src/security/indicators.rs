use serde::{Deserialize, Serialize};

use super::extremum::{
    bounded_oscillatory_argmin, nadir_time_fault_on, nadir_time_post_fault, nadir_time_recovery, negated,
    recovery_argmin, unbounded_oscillatory_argmin,
};
use super::SecurityError;
use crate::enf::{Branch, DisturbanceScenario, EffectiveParams, EnfResponse, Phase, OMEGA_0};

/// Spacing of the two-point RoCoF estimate, s.
pub const ROCOF_WINDOW: f64 = 0.1;
pub const DEFAULT_SENSITIVITY_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocofEstimates {
    /// `ΔP/H̄`
    pub published: f64,
    /// `ΔP/(2H̄)`
    pub model: f64,
    /// `(ω̄(t_f + 0.1) − ω̄(t_f)) / 0.1` on the closed-form trajectory.
    pub measured: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyExtremum {
    pub omega: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityIndicators {
    /// Published maximum RoCoF, pu/s (signed).
    pub r_max: f64,
    pub r_max_model: f64,
    pub r_max_measured: f64,
    pub omega_nadir: f64,
    pub nadir_time: f64,
    pub omega_steady: f64,
    pub omega_zenith: f64,
    pub zenith_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityVector {
    pub s_h: f64,
    pub s_d: f64,
    pub s_k: f64,
    pub s_tau: f64,
}

impl SensitivityVector {
    pub fn to_array(self) -> [f64; 4] {
        [self.s_h, self.s_d, self.s_k, self.s_tau]
    }
}

pub fn max_rocof(p: &EffectiveParams, scn: &DisturbanceScenario) -> Result<RocofEstimates, SecurityError> {
    let resp = EnfResponse::new(p, scn)?;
    Ok(rocof_from(&resp))
}

fn rocof_from(resp: &EnfResponse) -> RocofEstimates {
    let dp = resp.scenario().initial_power();
    let h = resp.params().h_bar;
    let t_f = resp.scenario().onset();
    RocofEstimates {
        published: dp / h,
        model: dp / (2.0 * h),
        measured: (resp.omega(t_f + ROCOF_WINDOW) - resp.omega(t_f)) / ROCOF_WINDOW,
    }
}

fn branch_argmin(b: &Branch) -> f64 {
    if b.slope != 0.0 {
        recovery_argmin(b)
    } else if b.end.is_finite() {
        bounded_oscillatory_argmin(b)
    } else {
        unbounded_oscillatory_argmin(b)
    }
}

/// Lowest frequency over the whole response: the pre-fault value and the
/// minimum of each branch, earliest time on ties.
fn nadir_of(resp: &EnfResponse) -> FrequencyExtremum {
    let mut candidates = vec![(resp.scenario().onset(), 0.0)];
    match resp.scenario() {
        DisturbanceScenario::Temporary(f) => {
            let c = resp.constants();
            let t_m2 = nadir_time_fault_on(c, f);
            let t_m3 = nadir_time_recovery(c, f);
            let t_m4 = nadir_time_post_fault(c, f, resp.state_at(f.t_r()));
            for (phase, t) in [
                (Phase::FaultOn, t_m2),
                (Phase::Recovery, t_m3),
                (Phase::PostFault, t_m4),
            ] {
                let b = resp.branch(phase).expect("temporary response has all phases");
                candidates.push((t, b.deviation(t)));
            }
        }
        DisturbanceScenario::Permanent { .. } => {
            for b in resp.branches() {
                let t = branch_argmin(b);
                candidates.push((t, b.deviation(t)));
            }
        }
    }
    pick(candidates, |v| v)
}

fn zenith_of(resp: &EnfResponse) -> FrequencyExtremum {
    let mut candidates = vec![(resp.scenario().onset(), 0.0)];
    for b in resp.branches() {
        let t = branch_argmin(&negated(b));
        candidates.push((t, b.deviation(t)));
    }
    pick(candidates, |v| -v)
}

fn pick(candidates: Vec<(f64, f64)>, key: impl Fn(f64) -> f64) -> FrequencyExtremum {
    let mut best = candidates[0];
    for &(t, v) in &candidates[1..] {
        if key(v) < key(best.1) || (key(v) == key(best.1) && t < best.0) {
            best = (t, v);
        }
    }
    FrequencyExtremum {
        omega: OMEGA_0 + best.1,
        time: best.0,
    }
}

/// Frequency nadir `min{ω₀, ω̄(t_m2), ω̄(t_m3), ω̄(t_m4)}` with its time.
pub fn frequency_nadir(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
) -> Result<FrequencyExtremum, SecurityError> {
    Ok(nadir_of(&EnfResponse::new(p, scn)?))
}

/// Highest frequency, the counterpart of the nadir for over-frequency events.
pub fn frequency_zenith(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
) -> Result<FrequencyExtremum, SecurityError> {
    Ok(zenith_of(&EnfResponse::new(p, scn)?))
}

pub fn indicators(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
) -> Result<SecurityIndicators, SecurityError> {
    let resp = EnfResponse::new(p, scn)?;
    let rocof = rocof_from(&resp);
    let nadir = nadir_of(&resp);
    let zenith = zenith_of(&resp);
    let omega_steady = match scn {
        DisturbanceScenario::Temporary(_) => OMEGA_0,
        DisturbanceScenario::Permanent { dp, .. } => OMEGA_0 + dp / (p.d_bar + p.k_bar),
    };
    Ok(SecurityIndicators {
        r_max: rocof.published,
        r_max_model: rocof.model,
        r_max_measured: rocof.measured,
        omega_nadir: nadir.omega,
        nadir_time: nadir.time,
        omega_steady,
        omega_zenith: zenith.omega,
        zenith_time: zenith.time,
    })
}

/// Unit-less sensitivities `∂R/∂x · x/R` of the published maximum RoCoF.
///
/// `R = ΔP/H̄` depends on the inertia alone, so `s_h = −ΔP/(H̄·R) = −1` and
/// the other entries vanish. A zero disturbance is given the same limit.
pub fn sensitivity_rocof(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
) -> Result<SensitivityVector, SecurityError> {
    p.validate()?;
    scn.validate()?;
    let dp = scn.initial_power();
    let r = dp / p.h_bar;
    let s_h = if r == 0.0 { -1.0 } else { -(dp / p.h_bar) / r };
    Ok(SensitivityVector {
        s_h,
        s_d: 0.0,
        s_k: 0.0,
        s_tau: 0.0,
    })
}

/// Unit-less sensitivities `∂ω_nadir/∂x · x/ω_nadir` by central differences
/// with relative step `rel_step`.
pub fn sensitivity_nadir(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
    rel_step: f64,
) -> Result<SensitivityVector, SecurityError> {
    if !(1e-6..=1e-2).contains(&rel_step) {
        return Err(SecurityError::InvalidStep(rel_step));
    }
    let nominal = frequency_nadir(p, scn)?.omega;
    let base = p.to_array();
    let mut s = [0.0; 4];
    for i in 0..4 {
        let h = rel_step * base[i];
        let mut up = base;
        let mut down = base;
        up[i] += h;
        down[i] -= h;
        let n_up = frequency_nadir(&EffectiveParams::from_array(up), scn)?.omega;
        let n_down = frequency_nadir(&EffectiveParams::from_array(down), scn)?.omega;
        s[i] = (n_up - n_down) / (up[i] - down[i]) * base[i] / nominal;
    }
    Ok(SensitivityVector {
        s_h: s[0],
        s_d: s[1],
        s_k: s[2],
        s_tau: s[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enf::TemporaryFault;

    fn params() -> EffectiveParams {
        EffectiveParams::new(4.0, 6.0, 20.0, 1.0).unwrap()
    }

    fn fault() -> TemporaryFault {
        TemporaryFault {
            t_f: 1.0,
            t_c: 1.15,
            r_p: 2.0,
            p_gfl0: 0.2,
            p_load0: 0.9,
            u_f: 0.8,
            a: 0.3,
            b: 0.3,
            c: 0.4,
        }
    }

    #[test]
    fn rocof_examples() {
        let scn = DisturbanceScenario::permanent(-0.5);
        let r = max_rocof(&params(), &scn).unwrap();
        assert_eq!(r.published, -0.125);
        assert_eq!(r.model, -0.0625);
        assert!(r.measured < 0.0 && r.measured > r.model);
    }

    #[test]
    fn zero_disturbance_nadir_is_nominal() {
        let mut f = fault();
        f.p_gfl0 = 0.0;
        f.p_load0 = 0.0;
        let n = frequency_nadir(&params(), &DisturbanceScenario::Temporary(f)).unwrap();
        assert_eq!(n.omega, OMEGA_0);
        assert_eq!(n.time, f.t_f);
    }

    #[test]
    fn balanced_fault_on_power_leaves_only_the_ramp() {
        // ΔP_i2 = 0: flat during the fault, the ramp deficit still pulls the frequency down
        let mut f = fault();
        f.p_load0 = f.p_gfl0 / (1.0 - f.a * f.u_f.powi(2) - f.b * f.u_f - f.c);
        assert!(f.fault_power().abs() < 1e-15);
        let scn = DisturbanceScenario::Temporary(f);
        let resp = EnfResponse::new(&params(), &scn).unwrap();
        assert!(resp.deviation(f.t_c).abs() < 1e-15);
        let n = frequency_nadir(&params(), &scn).unwrap();
        assert!(n.omega < OMEGA_0 && n.time > f.t_c);
    }

    #[test]
    fn nadir_below_every_sample() {
        let scn = DisturbanceScenario::Temporary(fault());
        let resp = EnfResponse::new(&params(), &scn).unwrap();
        let n = nadir_of(&resp);
        for i in 0..=200_000 {
            let t = i as f64 * 1e-4;
            assert!(n.omega <= resp.omega(t) + 1e-8);
        }
        assert!((resp.omega(n.time) - n.omega).abs() < 1e-15);
    }

    #[test]
    fn nadir_non_decreasing_in_inertia() {
        let scn = DisturbanceScenario::Temporary(fault());
        let mut last = f64::NEG_INFINITY;
        for i in 0..=60 {
            let h = 3.0 + 0.05 * i as f64;
            let n = frequency_nadir(&params().with_inertia(h), &scn).unwrap().omega;
            assert!(n >= last - 1e-15);
            last = n;
        }
    }

    #[test]
    fn permanent_nadir_and_steady_state() {
        let scn = DisturbanceScenario::permanent(-0.2);
        let ind = indicators(&params(), &scn).unwrap();
        assert!((ind.omega_steady - (1.0 - 0.2 / 26.0)).abs() < 1e-15);
        assert!(ind.omega_nadir < ind.omega_steady);
        let resp = EnfResponse::new(&params(), &scn).unwrap();
        for i in 0..=100_000 {
            assert!(ind.omega_nadir <= resp.omega(i as f64 * 1e-4) + 1e-12);
        }
        assert!(resp.derivative(ind.nadir_time).abs() < 1e-12);
    }

    #[test]
    fn over_frequency_zenith() {
        let scn = DisturbanceScenario::permanent(0.2);
        let ind = indicators(&params(), &scn).unwrap();
        assert_eq!(ind.omega_nadir, OMEGA_0);
        let resp = EnfResponse::new(&params(), &scn).unwrap();
        for i in 0..=100_000 {
            assert!(ind.omega_zenith >= resp.omega(i as f64 * 1e-4) - 1e-12);
        }
        assert!(ind.omega_zenith > ind.omega_steady);
    }

    #[test]
    fn rocof_sensitivity_is_exact() {
        for (h, dp) in [(4.0, -0.5), (2.3, -0.037), (7.1, 0.2), (3.0, 0.0)] {
            let s =
                sensitivity_rocof(&params().with_inertia(h), &DisturbanceScenario::permanent(dp)).unwrap();
            assert_eq!(s.to_array(), [-1.0, 0.0, 0.0, 0.0]);
        }
        // the published RoCoF does not depend on D̄
        let scn = DisturbanceScenario::Temporary(fault());
        let p = params();
        let up = EffectiveParams {
            d_bar: p.d_bar * 1.001,
            ..p
        };
        let down = EffectiveParams {
            d_bar: p.d_bar * 0.999,
            ..p
        };
        let num = (max_rocof(&up, &scn).unwrap().published - max_rocof(&down, &scn).unwrap().published)
            / (0.002 * p.d_bar);
        assert!(num.abs() <= 1e-10);
    }

    #[test]
    fn nadir_sensitivity_is_step_robust_and_inertia_dominated() {
        let scn = DisturbanceScenario::Temporary(fault());
        let s = sensitivity_nadir(&params(), &scn, 1e-4).unwrap();
        let half = sensitivity_nadir(&params(), &scn, 5e-5).unwrap();
        for (a, b) in s.to_array().iter().zip(half.to_array()) {
            assert!((a - b).abs() <= 0.01 * a.abs(), "{a} vs {b}");
        }
        assert!(s.s_h > 0.0);
        assert!(
            s.s_h.abs() > s.s_d.abs().max(s.s_k.abs()).max(s.s_tau.abs()),
            "{s:?}"
        );
        assert!(sensitivity_nadir(&params(), &scn, 0.1).is_err());
    }
}
