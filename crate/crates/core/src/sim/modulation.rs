use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::enf::EffectiveParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    /// Same unit as the modulated parameter.
    pub amplitude: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

/// Residual variation of one parameter around its effective value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamModulation {
    #[serde(default)]
    pub terms: Vec<SineTerm>,
    /// Standard deviation of white noise held constant over each step.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl ParamModulation {
    pub fn is_none(&self) -> bool {
        self.terms.iter().all(|s| s.amplitude == 0.0) && self.noise_sigma == 0.0
    }

    /// Deterministic part at `t`.
    pub fn periodic(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|s| s.amplitude * (TAU * s.frequency_hz * t + s.phase_rad).sin())
            .sum()
    }

    /// Lowest value the periodic part can take.
    fn worst_dip(&self) -> f64 {
        -self.terms.iter().map(|s| s.amplitude.abs()).sum::<f64>()
    }
}

/// Time-varying residuals h(t), d(t), k(t), e(t) added to the effective
/// parameters of a node.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterModulation {
    #[serde(default)]
    pub h: ParamModulation,
    #[serde(default)]
    pub d: ParamModulation,
    #[serde(default)]
    pub k: ParamModulation,
    #[serde(default)]
    pub tau: ParamModulation,
    /// Seed of the parameter-noise stream.
    #[serde(default)]
    pub seed: u64,
}

impl ParameterModulation {
    pub fn none() -> Self {
        Self::default()
    }

    /// Inertia oscillating with 5 % of H̄ at 0.8 Hz and 2 % at 2.3 Hz; the
    /// other parameters are constant.
    pub fn inertia_default(base: &EffectiveParams) -> Self {
        Self {
            h: ParamModulation {
                terms: vec![
                    SineTerm {
                        amplitude: 0.05 * base.h_bar,
                        frequency_hz: 0.8,
                        phase_rad: 0.0,
                    },
                    SineTerm {
                        amplitude: 0.02 * base.h_bar,
                        frequency_hz: 2.3,
                        phase_rad: 0.0,
                    },
                ],
                noise_sigma: 0.0,
            },
            ..Self::default()
        }
    }

    pub fn is_none(&self) -> bool {
        self.h.is_none() && self.d.is_none() && self.k.is_none() && self.tau.is_none()
    }

    fn channels(&self) -> [&ParamModulation; 4] {
        [&self.h, &self.d, &self.k, &self.tau]
    }

    /// Whether the periodic parts alone can never push a parameter to zero.
    pub fn periodic_part_keeps_positive(&self, base: &EffectiveParams) -> bool {
        base.to_array()
            .iter()
            .zip(self.channels())
            .all(|(v, m)| v + m.worst_dip() > 0.0)
    }

    pub(crate) fn noise_stream(&self) -> NoiseStream {
        NoiseStream::new(self)
    }
}

/// Per-step parameter noise, one draw per channel with non-zero sigma.
pub(crate) struct NoiseStream {
    rng: ChaCha8Rng,
    dists: [Option<Normal<f64>>; 4],
}

impl NoiseStream {
    fn new(m: &ParameterModulation) -> Self {
        let dist = |s: f64| (s > 0.0).then(|| Normal::new(0.0, s).expect("finite sigma"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(m.seed),
            dists: [
                dist(m.h.noise_sigma),
                dist(m.d.noise_sigma),
                dist(m.k.noise_sigma),
                dist(m.tau.noise_sigma),
            ],
        }
    }

    pub(crate) fn draw(&mut self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, d) in out.iter_mut().zip(&self.dists) {
            if let Some(d) = d {
                *o = d.sample(&mut self.rng);
            }
        }
        out
    }
}

/// Instantaneous parameters `base + periodic(t) + held_noise`.
pub(crate) fn instantaneous(
    base: &EffectiveParams,
    m: &ParameterModulation,
    t: f64,
    noise: &[f64; 4],
) -> [f64; 4] {
    let b = base.to_array();
    let ch = m.channels();
    std::array::from_fn(|i| b[i] + ch[i].periodic(t) + noise[i])
}
