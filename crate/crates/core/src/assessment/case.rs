use serde::{Deserialize, Serialize};

use super::AssessmentError;
use crate::enf::{DisturbanceKind, DisturbanceScenario};

pub const FEATURE_NAMES: [&str; 4] = ["fault_power", "fault_duration", "voltage_dip", "ramp_rate"];

/// A disturbance with its location and a name used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatedScenario {
    pub name: String,
    pub disturbance_node: String,
    pub scenario: DisturbanceScenario,
}

/// Coordinates of a case for neighbour matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDescriptor {
    pub disturbance_type: DisturbanceKind,
    pub disturbance_node: String,
    /// `|ΔP_i2|` (pu), `t_c − t_f` (s), `1 − U_f` (pu), `r_p` (pu/s). A
    /// permanent step only fills the first entry.
    pub features: [f64; 4],
}

impl CaseDescriptor {
    pub fn new(node: impl Into<String>, scn: &DisturbanceScenario) -> Result<Self, AssessmentError> {
        scn.validate()
            .map_err(|e| AssessmentError::InvalidCase(e.to_string()))?;
        let features = match scn {
            DisturbanceScenario::Permanent { dp, .. } => [dp.abs(), 0.0, 0.0, 0.0],
            DisturbanceScenario::Temporary(f) => [f.fault_power().abs(), f.t_c - f.t_f, 1.0 - f.u_f, f.r_p],
        };
        Ok(Self {
            disturbance_type: scn.kind(),
            disturbance_node: node.into(),
            features,
        })
    }

    pub fn from_located(s: &LocatedScenario) -> Result<Self, AssessmentError> {
        Self::new(s.disturbance_node.clone(), &s.scenario)
    }

    pub fn comparable(&self, other: &CaseDescriptor) -> bool {
        self.disturbance_type == other.disturbance_type && self.disturbance_node == other.disturbance_node
    }

    /// Euclidean distance of the features divided by `scales`.
    pub fn distance(&self, other: &CaseDescriptor, scales: &FeatureScales) -> f64 {
        self.features
            .iter()
            .zip(&other.features)
            .zip(&scales.0)
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-feature normalisation, each entry positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScales(pub [f64; 4]);

impl Default for FeatureScales {
    fn default() -> Self {
        Self([1.0; 4])
    }
}

impl FeatureScales {
    /// Population standard deviation of each feature, 1 where it vanishes.
    pub fn from_cases<'a>(cases: impl IntoIterator<Item = &'a CaseDescriptor>) -> Self {
        let cases: Vec<&CaseDescriptor> = cases.into_iter().collect();
        if cases.is_empty() {
            return Self::default();
        }
        let n = cases.len() as f64;
        Self(std::array::from_fn(|i| {
            let mean = cases.iter().map(|c| c.features[i]).sum::<f64>() / n;
            let var = cases.iter().map(|c| (c.features[i] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd > 1e-12 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        }))
    }

    pub fn validate(&self) -> Result<(), AssessmentError> {
        if self.0.iter().all(|s| *s > 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(AssessmentError::InvalidTable(format!(
                "feature scales {:?} must be positive",
                self.0
            )))
        }
    }
}

/// Mixes a base seed with two indices (SplitMix64 finaliser).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z =
        base ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(31);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enf::TemporaryFault;

    fn fault(u_f: f64) -> DisturbanceScenario {
        DisturbanceScenario::Temporary(TemporaryFault {
            t_f: 1.0,
            t_c: 1.15,
            r_p: 2.0,
            p_gfl0: 0.2,
            p_load0: 0.9,
            u_f,
            a: 0.3,
            b: 0.3,
            c: 0.4,
        })
    }

    #[test]
    fn features_of_a_fault() {
        let c = CaseDescriptor::new("n1", &fault(0.8)).unwrap();
        assert_eq!(c.disturbance_type, DisturbanceKind::Temporary);
        assert!((c.features[0] - 0.0488).abs() < 1e-12);
        assert!((c.features[1] - 0.15).abs() < 1e-12);
        assert!((c.features[2] - 0.2).abs() < 1e-12);
        assert_eq!(c.features[3], 2.0);
        let p = CaseDescriptor::new("n1", &DisturbanceScenario::permanent(-0.1)).unwrap();
        assert_eq!(p.features, [0.1, 0.0, 0.0, 0.0]);
        assert!(!c.comparable(&p));
    }

    #[test]
    fn scales_fall_back_to_one() {
        let a = CaseDescriptor::new("n1", &fault(0.8)).unwrap();
        let b = CaseDescriptor::new("n1", &fault(0.7)).unwrap();
        let s = FeatureScales::from_cases([&a, &b]);
        assert_eq!(s.0[1], 1.0);
        assert_eq!(s.0[3], 1.0);
        assert!((s.0[2] - 0.05).abs() < 1e-12);
        assert!((a.distance(&b, &s) - ((a.features[0] - b.features[0]) / s.0[0]).hypot(2.0)).abs() < 1e-12);
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(5, 2, 3), derive_seed(5, 2, 3));
    }
}
