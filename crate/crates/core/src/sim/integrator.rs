use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::modulation::{instantaneous, ParameterModulation};
use super::SimError;
use crate::enf::{DisturbanceScenario, EffectiveParams, Sample, Trajectory, OMEGA_0};

/// Largest admissible integration step, s.
pub const MAX_STEP: f64 = 1e-3;
/// Frequency deviation treated as loss of stability, pu.
pub const INSTABILITY_LIMIT: f64 = 0.5;

const PARAM_NAMES: [&str; 4] = ["h", "d", "k", "tau"];

/// State of the two-state nodal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    /// Frequency, pu.
    pub omega: f64,
    /// Primary regulation power, pu.
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub dt: f64,
    pub horizon: f64,
    /// Spacing of recorded samples; must be a whole number of steps. Zero
    /// records every step.
    #[serde(default)]
    pub record_interval: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 25.0,
            record_interval: 0.0,
        }
    }
}

impl SimSettings {
    fn steps(&self) -> Result<(usize, usize), SimError> {
        if !(self.dt > 0.0 && self.dt <= MAX_STEP) {
            return Err(SimError::InvalidStep(self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::InvalidHorizon(format!("horizon {} s", self.horizon)));
        }
        let n = (self.horizon / self.dt).round() as usize;
        let every = if self.record_interval <= 0.0 {
            1
        } else {
            let ratio = self.record_interval / self.dt;
            let every = ratio.round();
            if every < 1.0 || (ratio - every).abs() > 1e-6 * ratio {
                return Err(SimError::InvalidStep(self.record_interval));
            }
            every as usize
        };
        Ok((n, every))
    }
}

/// Shortest horizon that lets a temporary-fault response settle: `t_r + 10/λ`.
pub fn settling_horizon(base: &EffectiveParams, scn: &DisturbanceScenario) -> f64 {
    let lambda = (base.tau_bar * base.d_bar + 2.0 * base.h_bar) / (4.0 * base.tau_bar * base.h_bar);
    let last = scn.breakpoints().into_iter().fold(0.0, f64::max);
    last + 10.0 / lambda
}

/// Integrates the time-varying nodal model with classical RK4 and returns
/// every recorded state.
///
/// Steps are split at forcing breakpoints so that every sub-step sees a
/// smooth forcing; the parameter noise is drawn once per step.
pub fn simulate_states(
    base: &EffectiveParams,
    modulation: &ParameterModulation,
    scn: &DisturbanceScenario,
    settings: &SimSettings,
) -> Result<Vec<SimState>, SimError> {
    scn.validate()?;
    if !base.is_positive() {
        return Err(SimError::NonPositiveParameter {
            parameter: "base",
            t: 0.0,
            value: base.to_array().into_iter().fold(f64::INFINITY, f64::min),
        });
    }
    let (n, every) = settings.steps()?;
    if scn.as_temporary().is_some() {
        let needed = settling_horizon(base, scn);
        if settings.horizon + 1e-9 < needed {
            return Err(SimError::InvalidHorizon(format!(
                "horizon {} s is shorter than t_r + 10/lambda = {needed:.3} s",
                settings.horizon
            )));
        }
    }

    let dt = settings.dt;
    let mut noise = modulation.noise_stream();
    let breakpoints = scn.breakpoints();
    let (mut w, mut g) = (0.0_f64, 0.0_f64);
    let mut out = Vec::with_capacity(n / every + 1);
    out.push(SimState {
        t: 0.0,
        omega: OMEGA_0,
        g: 0.0,
    });

    let mut cuts = Vec::with_capacity(breakpoints.len() + 2);
    for i in 0..n {
        let t0 = i as f64 * dt;
        let t1 = (i + 1) as f64 * dt;
        let held = noise.draw();
        let params_at = |t: f64| -> Result<[f64; 4], SimError> {
            let p = instantaneous(base, modulation, t, &held);
            if let Some(j) = p.iter().position(|v| !(*v > 0.0)) {
                return Err(SimError::NonPositiveParameter {
                    parameter: PARAM_NAMES[j],
                    t,
                    value: p[j],
                });
            }
            Ok(p)
        };
        cuts.clear();
        cuts.push(t0);
        cuts.extend(breakpoints.iter().copied().filter(|&b| b > t0 && b < t1));
        cuts.push(t1);
        for k in 0..cuts.len() - 1 {
            let (a, b) = (cuts[k], cuts[k + 1]);
            let phase = scn.phase_at(0.5 * (a + b));
            let rhs = |t: f64, w: f64, g: f64| -> Result<(f64, f64), SimError> {
                let [h, d, kk, tau] = params_at(t)?;
                let dp = scn.power_in_phase(phase, t);
                Ok(((dp - d * w - g) / (2.0 * h), (kk * w - g) / tau))
            };
            let h = b - a;
            let k1 = rhs(a, w, g)?;
            let k2 = rhs(a + 0.5 * h, w + 0.5 * h * k1.0, g + 0.5 * h * k1.1)?;
            let k3 = rhs(a + 0.5 * h, w + 0.5 * h * k2.0, g + 0.5 * h * k2.1)?;
            let k4 = rhs(b, w + h * k3.0, g + h * k3.1)?;
            w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            g += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        if !(w.abs() <= INSTABILITY_LIMIT) || !g.is_finite() {
            return Err(SimError::Unstable { t: t1, deviation: w });
        }
        if (i + 1) % every == 0 {
            out.push(SimState {
                t: t1,
                omega: OMEGA_0 + w,
                g,
            });
        }
    }
    Ok(out)
}

/// Frequency trajectory of one node; every step is recorded.
pub fn simulate_node(
    base: &EffectiveParams,
    modulation: &ParameterModulation,
    scn: &DisturbanceScenario,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, SimError> {
    let settings = SimSettings {
        dt,
        horizon,
        record_interval: 0.0,
    };
    simulate_with(base, modulation, scn, &settings)
}

pub fn simulate_with(
    base: &EffectiveParams,
    modulation: &ParameterModulation,
    scn: &DisturbanceScenario,
    settings: &SimSettings,
) -> Result<Trajectory, SimError> {
    let states = simulate_states(base, modulation, scn, settings)?;
    let samples = states
        .iter()
        .map(|s| Sample {
            t: s.t,
            omega: s.omega,
        })
        .collect();
    Ok(Trajectory::new("node", samples)?)
}

/// Adds seeded Gaussian measurement noise to every sample. A non-positive
/// `noise_sigma` returns the input unchanged.
pub fn synthesize_pmu(traj: &Trajectory, noise_sigma: f64, seed: u64) -> Trajectory {
    if !(noise_sigma > 0.0) {
        return traj.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).expect("finite sigma");
    traj.map_omega(|_, s| s.omega + normal.sample(&mut rng))
}
