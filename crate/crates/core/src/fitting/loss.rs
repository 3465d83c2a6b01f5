use serde::{Deserialize, Serialize};

use super::FitError;
use crate::enf::{DisturbanceScenario, EffectiveParams, EnfResponse, Trajectory};

/// Loss assigned to candidates that are not positive and underdamped.
pub const INFEASIBLE_LOSS: f64 = 1e6;

/// Weights and probe times of the fitting loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Trajectory error over `[t_f, t1]`.
    pub k1: f64,
    /// Error at the RoCoF probe.
    pub k2: f64,
    /// Error of the nadir time.
    pub k3: f64,
    /// Error of the nadir.
    pub k4: f64,
    /// Error at `t_inf`.
    pub k5: f64,
    /// `t_RoCoF − t_f`, s.
    pub t_rocof_offset: f64,
    /// End of the fitting window, s.
    pub t1: f64,
    /// Steady-state probe time, s.
    pub t_inf: f64,
}

/// The point terms are single squared errors while the trajectory term is a
/// mean, so their weights are kept small enough that one noisy sample, or an
/// argmin shifted by a few samples, cannot outweigh the whole curve.
impl Default for LossWeights {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 1e-2,
            k3: 1e-4,
            k4: 1e-1,
            k5: 1e-2,
            t_rocof_offset: 0.1,
            t1: 15.0,
            t_inf: 20.0,
        }
    }
}

impl LossWeights {
    /// Only the trajectory term.
    pub fn trajectory_only() -> Self {
        Self {
            k2: 0.0,
            k3: 0.0,
            k4: 0.0,
            k5: 0.0,
            ..Self::default()
        }
    }

    pub fn weights(&self) -> [f64; 5] {
        [self.k1, self.k2, self.k3, self.k4, self.k5]
    }

    pub fn validate(&self, t_f: f64) -> Result<(), FitError> {
        let k = self.weights();
        if k.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || k.iter().all(|w| *w == 0.0) {
            return Err(FitError::InvalidWeights(format!(
                "weights {k:?} must be non-negative with at least one positive"
            )));
        }
        if !(self.t_rocof_offset > 0.0 && self.t_rocof_offset <= 0.2) {
            return Err(FitError::InvalidWeights(format!(
                "RoCoF probe offset {} s outside (0, 0.2]",
                self.t_rocof_offset
            )));
        }
        if !(t_f < self.t1 && self.t1 <= self.t_inf) {
            return Err(FitError::InvalidWeights(format!(
                "need t_f < t1 <= t_inf, got {t_f}, {}, {}",
                self.t1, self.t_inf
            )));
        }
        Ok(())
    }
}

/// Loss of candidate parameters against one observed trajectory, with the
/// observed-side quantities computed once.
#[derive(Debug, Clone)]
pub struct LossEvaluator {
    scenario: DisturbanceScenario,
    weights: LossWeights,
    t_f: f64,
    /// Sample times in `[t_f, t_inf]`.
    times: Vec<f64>,
    /// Observed values at `times`.
    observed: Vec<f64>,
    /// Number of leading `times` inside `[t_f, t1]`.
    n_window: usize,
    obs_at_t_f: f64,
    obs_at_t1: f64,
    obs_rocof: f64,
    obs_inf: f64,
    obs_argmin: f64,
    obs_min: f64,
}

impl LossEvaluator {
    pub fn new(
        observed: &Trajectory,
        scenario: &DisturbanceScenario,
        weights: &LossWeights,
    ) -> Result<Self, FitError> {
        scenario.validate()?;
        let t_f = scenario.onset();
        weights.validate(t_f)?;
        let (first, last) = match (observed.first_time(), observed.last_time()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(FitError::EmptyTrajectory),
        };
        if first > t_f || last < weights.t_inf {
            return Err(FitError::WindowMismatch(format!(
                "samples span [{first}, {last}] s but the loss needs [{t_f}, {}] s",
                weights.t_inf
            )));
        }
        let at = |t: f64| observed.value_at(t).expect("inside the sampled span");
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for s in observed.samples() {
            if s.t >= t_f && s.t <= weights.t_inf {
                times.push(s.t);
                values.push(s.omega);
            }
        }
        let n_window = times.partition_point(|&t| t <= weights.t1);
        let (obs_argmin, obs_min) = argmin(&times, &values);
        Ok(Self {
            scenario: *scenario,
            weights: *weights,
            t_f,
            obs_at_t_f: at(t_f),
            obs_at_t1: at(weights.t1),
            obs_rocof: at(t_f + weights.t_rocof_offset),
            obs_inf: at(weights.t_inf),
            obs_argmin,
            obs_min,
            times,
            observed: values,
            n_window,
        })
    }

    pub fn weights(&self) -> &LossWeights {
        &self.weights
    }

    /// The five unweighted terms; `Err` if the candidate is infeasible.
    pub fn terms(&self, candidate: &EffectiveParams) -> Result<[f64; 5], FitError> {
        let resp = EnfResponse::new(candidate, &self.scenario)?;
        let w = &self.weights;
        let model: Vec<f64> = self.times.iter().map(|&t| resp.omega(t)).collect();

        // trapezoid over [t_f, t1] with interpolated end points
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(self.n_window + 2);
        if self.times.first() != Some(&self.t_f) {
            nodes.push((self.t_f, sq(resp.omega(self.t_f) - self.obs_at_t_f)));
        }
        for ((&t, m), o) in self
            .times
            .iter()
            .zip(&model)
            .zip(&self.observed)
            .take(self.n_window)
        {
            nodes.push((t, sq(m - o)));
        }
        if nodes.last().map(|n| n.0) != Some(w.t1) {
            nodes.push((w.t1, sq(resp.omega(w.t1) - self.obs_at_t1)));
        }
        let integral: f64 = nodes
            .windows(2)
            .map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1))
            .sum();
        let trajectory = integral / (w.t1 - self.t_f);

        let rocof = sq(resp.omega(self.t_f + w.t_rocof_offset) - self.obs_rocof);
        let (t_min, v_min) = argmin(&self.times, &model);
        let nadir_time = sq(t_min - self.obs_argmin);
        let nadir = sq(v_min - self.obs_min);
        let steady = sq(resp.omega(w.t_inf) - self.obs_inf);
        Ok([trajectory, rocof, nadir_time, nadir, steady])
    }

    /// Weighted sum of the terms, or [`INFEASIBLE_LOSS`].
    pub fn evaluate(&self, candidate: &EffectiveParams) -> f64 {
        match self.terms(candidate) {
            Ok(t) => {
                let v: f64 = t.iter().zip(self.weights.weights()).map(|(t, k)| t * k).sum();
                if v.is_finite() {
                    v
                } else {
                    INFEASIBLE_LOSS
                }
            }
            Err(_) => INFEASIBLE_LOSS,
        }
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// First index of the smallest value.
fn argmin(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (times[0], values[0]);
    for (&t, &v) in times.iter().zip(values) {
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

/// Loss of `candidate` against `observed`; infeasible candidates are errors.
pub fn loss(
    candidate: &EffectiveParams,
    observed: &Trajectory,
    scn: &DisturbanceScenario,
    w: &LossWeights,
) -> Result<f64, FitError> {
    let ev = LossEvaluator::new(observed, scn, w)?;
    let terms = ev.terms(candidate)?;
    Ok(terms.iter().zip(w.weights()).map(|(t, k)| t * k).sum())
}
