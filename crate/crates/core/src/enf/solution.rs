use serde::{Deserialize, Serialize};

use super::{DisturbanceScenario, EffectiveParams, EnfError, Phase, TemporaryFault, OMEGA_0};

/// Constants of the closed-form ENF trajectory.
///
/// `lambda`/`omega_d` are the decay rate and damped frequency of the pole pair,
/// `a1` and `k2` shape the fault-on (or permanent) step response, and
/// `c1`, `c2`, `a_cos`, `a_sin` the ramp-recovery branch. For a permanent step
/// the recovery constants are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    pub lambda: f64,
    pub omega_d: f64,
    pub a1: f64,
    pub k2: f64,
    pub c1: f64,
    pub c2: f64,
    pub a_cos: f64,
    pub a_sin: f64,
}

/// Frequency deviation and its time derivative at a phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub deviation: f64,
    pub derivative: f64,
}

/// One analytic branch of the deviation Δω(t) = ω̄(t) − ω₀ on `(start, end]`:
///
/// `slope·s + offset + e^{−λs}·(a·cos(ω_d s) + b·sin(ω_d s))`, with `s = t − start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub phase: Phase,
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub offset: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub omega_d: f64,
}

impl Branch {
    pub fn deviation(&self, t: f64) -> f64 {
        let s = t - self.start;
        let (sin, cos) = (self.omega_d * s).sin_cos();
        self.slope * s + self.offset + (-self.lambda * s).exp() * (self.a * cos + self.b * sin)
    }

    /// Cosine and sine coefficients of the oscillatory part of the derivative.
    pub fn derivative_coefficients(&self) -> (f64, f64) {
        (
            self.omega_d * self.b - self.lambda * self.a,
            self.omega_d * self.a + self.lambda * self.b,
        )
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = t - self.start;
        let (p, q) = self.derivative_coefficients();
        let (sin, cos) = (self.omega_d * s).sin_cos();
        self.slope + (-self.lambda * s).exp() * (p * cos - q * sin)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let s = t - self.start;
        let (p, q) = self.derivative_coefficients();
        let (sin, cos) = (self.omega_d * s).sin_cos();
        let (l, w) = (self.lambda, self.omega_d);
        (-l * s).exp() * ((-l * p - w * q) * cos + (l * q - w * p) * sin)
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.start && t <= self.end
    }
}

/// Closed-form ENF response of one node to one disturbance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnfResponse {
    params: EffectiveParams,
    scenario: DisturbanceScenario,
    constants: ClosedFormConstants,
    branches: Vec<Branch>,
}

fn decay_and_frequency(p: &EffectiveParams) -> Result<(f64, f64, f64), EnfError> {
    p.validate()?;
    let root = p.discriminant().sqrt();
    let four_tau_h = 4.0 * p.tau_bar * p.h_bar;
    let lambda = (p.tau_bar * p.d_bar + 2.0 * p.h_bar) / four_tau_h;
    let omega_d = root / four_tau_h;
    Ok((lambda, omega_d, root))
}

/// Step-response shape factor consistent with the two-state model:
/// `(τD + 2τK − 2H)/√disc`, equivalently `((D+K)/(2H) − λ)/ω_d`.
fn step_shape(p: &EffectiveParams, root: f64) -> f64 {
    (p.tau_bar * p.d_bar + 2.0 * p.tau_bar * p.k_bar - 2.0 * p.h_bar) / root
}

/// The commonly quoted shape factor `(2τK − τD − 6H)/√disc`. It does not
/// reproduce the initial slope ΔP/(2H) of the model and is kept for
/// comparison only; the trajectory uses [`ClosedFormConstants::a1`].
pub fn published_a1(p: &EffectiveParams) -> Result<f64, EnfError> {
    let (_, _, root) = decay_and_frequency(p)?;
    Ok((2.0 * p.tau_bar * p.k_bar - p.tau_bar * p.d_bar - 6.0 * p.h_bar) / root)
}

impl EnfResponse {
    pub fn new(params: &EffectiveParams, scenario: &DisturbanceScenario) -> Result<Self, EnfError> {
        scenario.validate()?;
        let (lambda, omega_d, root) = decay_and_frequency(params)?;
        let a1 = step_shape(params, root);
        let stiffness = params.d_bar + params.k_bar;
        let k2 = scenario.initial_power() / stiffness;
        let step = Branch {
            phase: Phase::FaultOn,
            start: scenario.onset(),
            end: f64::INFINITY,
            slope: 0.0,
            offset: k2,
            a: -k2,
            b: k2 * a1,
            lambda,
            omega_d,
        };

        let fault = match scenario {
            DisturbanceScenario::Permanent { .. } => {
                return Ok(Self {
                    params: *params,
                    scenario: *scenario,
                    constants: ClosedFormConstants {
                        lambda,
                        omega_d,
                        a1,
                        k2,
                        c1: 0.0,
                        c2: 0.0,
                        a_cos: 0.0,
                        a_sin: 0.0,
                    },
                    branches: vec![step],
                });
            }
            DisturbanceScenario::Temporary(f) => f,
        };

        let fault_on = Branch {
            end: fault.t_c,
            ..step
        };
        let at_clearing = chain(
            params,
            &fault_on,
            fault.fault_power(),
            fault.recovery_power(fault.t_c),
        );
        let (c1, c2, a_cos, a_sin) = recovery_constants(params, fault, lambda, omega_d, at_clearing);
        let t_r = fault.t_r();
        let recovery = Branch {
            phase: Phase::Recovery,
            start: fault.t_c,
            end: t_r,
            slope: c1,
            offset: c2,
            a: a_cos,
            b: a_sin,
            lambda,
            omega_d,
        };
        let at_restore = chain(params, &recovery, fault.recovery_power(t_r), 0.0);
        let post_fault = Branch {
            phase: Phase::PostFault,
            start: t_r,
            end: f64::INFINITY,
            slope: 0.0,
            offset: 0.0,
            a: at_restore.deviation,
            b: (at_restore.derivative + lambda * at_restore.deviation) / omega_d,
            lambda,
            omega_d,
        };

        Ok(Self {
            params: *params,
            scenario: *scenario,
            constants: ClosedFormConstants {
                lambda,
                omega_d,
                a1,
                k2,
                c1,
                c2,
                a_cos,
                a_sin,
            },
            branches: vec![fault_on, recovery, post_fault],
        })
    }

    pub fn params(&self) -> &EffectiveParams {
        &self.params
    }

    pub fn scenario(&self) -> &DisturbanceScenario {
        &self.scenario
    }

    pub fn constants(&self) -> &ClosedFormConstants {
        &self.constants
    }

    /// Analytic branches after the disturbance onset, in time order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, phase: Phase) -> Option<&Branch> {
        self.branches.iter().find(|b| b.phase == phase)
    }

    fn active(&self, t: f64) -> Option<&Branch> {
        self.branches.iter().find(|b| b.contains(t))
    }

    /// ω̄(t) − ω₀.
    pub fn deviation(&self, t: f64) -> f64 {
        self.active(t).map_or(0.0, |b| b.deviation(t))
    }

    /// ω̄(t) in pu.
    pub fn omega(&self, t: f64) -> f64 {
        OMEGA_0 + self.deviation(t)
    }

    /// dω̄/dt; at a phase boundary this is the left limit.
    pub fn derivative(&self, t: f64) -> f64 {
        self.active(t).map_or(0.0, |b| b.derivative(t))
    }

    /// dω̄/dt approached from the right.
    pub fn derivative_right(&self, t: f64) -> f64 {
        self.branches
            .iter()
            .find(|b| t >= b.start && t < b.end)
            .map_or(0.0, |b| b.derivative(t))
    }

    /// Deviation and left-limit derivative at `t`.
    pub fn state_at(&self, t: f64) -> BoundaryState {
        BoundaryState {
            deviation: self.deviation(t),
            derivative: self.derivative(t),
        }
    }
}

/// State handed from `prev` to the next branch at `prev.end`. The deviation
/// and the regulation power are continuous there, so the slope jumps by the
/// change in forcing over 2H.
fn chain(p: &EffectiveParams, prev: &Branch, power_before: f64, power_after: f64) -> BoundaryState {
    let t = prev.end;
    BoundaryState {
        deviation: prev.deviation(t),
        derivative: prev.derivative(t) + (power_after - power_before) / (2.0 * p.h_bar),
    }
}

fn recovery_constants(
    p: &EffectiveParams,
    fault: &TemporaryFault,
    lambda: f64,
    omega_d: f64,
    start: BoundaryState,
) -> (f64, f64, f64, f64) {
    let stiffness = p.d_bar + p.k_bar;
    let amplitude = fault.p_gfl0;
    let c1 = fault.r_p * amplitude / stiffness;
    let c2 = amplitude * (fault.r_p * p.tau_bar * p.k_bar - stiffness - 2.0 * fault.r_p * p.h_bar)
        / (stiffness * stiffness);
    let a_cos = start.deviation - c2;
    let a_sin = (start.derivative + lambda * a_cos - c1) / omega_d;
    (c1, c2, a_cos, a_sin)
}

/// Closed-form constants for `p` under `scn`.
pub fn phase_constants(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
) -> Result<ClosedFormConstants, EnfError> {
    Ok(*EnfResponse::new(p, scn)?.constants())
}

/// ω̄(t) for a permanent step `dp` applied at t = 0.
pub fn eval_permanent(p: &EffectiveParams, dp: f64, t: f64) -> Result<f64, EnfError> {
    Ok(EnfResponse::new(p, &DisturbanceScenario::permanent(dp))?.omega(t))
}

/// ω̄(t) under a temporary fault.
pub fn eval_temporary(p: &EffectiveParams, fault: &TemporaryFault, t: f64) -> Result<f64, EnfError> {
    Ok(EnfResponse::new(p, &DisturbanceScenario::Temporary(*fault))?.omega(t))
}

/// dω̄/dt of the active branch (left limit at boundaries).
pub fn eval_derivative(p: &EffectiveParams, scn: &DisturbanceScenario, t: f64) -> Result<f64, EnfError> {
    Ok(EnfResponse::new(p, scn)?.derivative(t))
}
