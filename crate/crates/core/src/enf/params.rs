use serde::{Deserialize, Serialize};

use super::EnfError;

/// Constant effective regulation parameters of one node.
///
/// `h_bar` is the effective nodal inertia (s), `d_bar` the damping (pu/pu),
/// `k_bar` the primary regulation gain (pu/pu) and `tau_bar` the regulation
/// time constant (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub h_bar: f64,
    pub d_bar: f64,
    pub k_bar: f64,
    pub tau_bar: f64,
}

impl EffectiveParams {
    /// Builds a validated parameter set (strictly positive and underdamped).
    pub fn new(h_bar: f64, d_bar: f64, k_bar: f64, tau_bar: f64) -> Result<Self, EnfError> {
        let p = Self::new_unchecked(h_bar, d_bar, k_bar, tau_bar);
        p.validate()?;
        Ok(p)
    }

    pub const fn new_unchecked(h_bar: f64, d_bar: f64, k_bar: f64, tau_bar: f64) -> Self {
        Self {
            h_bar,
            d_bar,
            k_bar,
            tau_bar,
        }
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new_unchecked(x[0], x[1], x[2], x[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.h_bar, self.d_bar, self.k_bar, self.tau_bar]
    }

    /// Same damping and regulation, different inertia.
    pub fn with_inertia(self, h_bar: f64) -> Self {
        Self { h_bar, ..self }
    }

    /// `8·τ·H·(D+K) − (τ·D + 2H)²`; positive iff the response is underdamped.
    pub fn discriminant(&self) -> f64 {
        let damping = self.tau_bar * self.d_bar + 2.0 * self.h_bar;
        8.0 * self.tau_bar * self.h_bar * (self.d_bar + self.k_bar) - damping * damping
    }

    pub fn is_positive(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite() && *v > 0.0)
    }

    pub fn is_underdamped(&self) -> bool {
        self.discriminant() > 0.0
    }

    pub fn validate(&self) -> Result<(), EnfError> {
        if !self.is_positive() {
            return Err(EnfError::NonPositiveParams(*self));
        }
        if !self.is_underdamped() {
            return Err(EnfError::NotUnderdamped {
                params: *self,
                discriminant: self.discriminant(),
            });
        }
        Ok(())
    }

    /// Open interval of inertia values for which the parameter set stays
    /// underdamped with `d_bar`, `k_bar` and `tau_bar` held fixed.
    ///
    /// The discriminant is `−4H² + 4τ(D+2K)H − τ²D²`, so the interval is
    /// `τ·((D+2K)/2 ∓ √(K(D+K)))`.
    pub fn underdamped_inertia_range(&self) -> Option<(f64, f64)> {
        let (d, k, tau) = (self.d_bar, self.k_bar, self.tau_bar);
        if !(d >= 0.0 && k > 0.0 && tau > 0.0) {
            return None;
        }
        let centre = 0.5 * (d + 2.0 * k);
        let half_width = (k * (d + k)).sqrt();
        Some((tau * (centre - half_width), tau * (centre + half_width)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_of_reference_node() {
        let p = EffectiveParams::new(4.0, 6.0, 20.0, 1.0).unwrap();
        assert_eq!(p.discriminant(), 636.0);
    }

    #[test]
    fn rejects_overdamped_node() {
        // 8·0.01·100·26 = 208 < (0.06 + 200)²
        let err = EffectiveParams::new(100.0, 6.0, 20.0, 0.01).unwrap_err();
        assert!(matches!(err, EnfError::NotUnderdamped { .. }));
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            EffectiveParams::new(0.0, 6.0, 20.0, 1.0),
            Err(EnfError::NonPositiveParams(_))
        ));
        assert!(EffectiveParams::new(4.0, 6.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn inertia_range_brackets_sign_change() {
        let p = EffectiveParams::new_unchecked(4.0, 6.0, 20.0, 1.0);
        let (lo, hi) = p.underdamped_inertia_range().unwrap();
        assert!(p.with_inertia(lo * 1.001).is_underdamped());
        assert!(!p.with_inertia(lo * 0.999).is_underdamped());
        assert!(p.with_inertia(hi * 0.999).is_underdamped());
        assert!(!p.with_inertia(hi * 1.001).is_underdamped());
    }
}
