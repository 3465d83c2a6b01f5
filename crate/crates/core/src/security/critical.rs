use serde::{Deserialize, Serialize};

use super::indicators::frequency_nadir;
use super::{RocofConvention, SecurityError, SecurityThresholds};
use crate::enf::{DisturbanceScenario, EffectiveParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalInertia {
    /// Inertia needed by the RoCoF limit, s.
    pub h_rocof: f64,
    /// Inertia needed by the nadir limit, s.
    pub h_dev: f64,
    pub h_cri: f64,
    /// False when the nadir stays above the limit over the whole bracket.
    pub nadir_binding: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalInertiaOptions {
    pub convention: RocofConvention,
    /// Search bracket for the nadir constraint, s.
    pub h_min: f64,
    pub h_max: f64,
    /// Final bracket width, s.
    pub tolerance: f64,
    /// Grid points of the monotonicity check.
    pub scan_points: usize,
}

impl Default for CriticalInertiaOptions {
    fn default() -> Self {
        Self {
            convention: RocofConvention::Published,
            h_min: 0.1,
            h_max: 50.0,
            tolerance: 1e-9,
            scan_points: 40,
        }
    }
}

/// Relative slack tolerated between nadir values that should be ordered.
const MONOTONE_SLACK: f64 = 1e-12;

pub fn critical_inertia(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
    th: &SecurityThresholds,
) -> Result<CriticalInertia, SecurityError> {
    critical_inertia_with(p, scn, th, &CriticalInertiaOptions::default())
}

/// Smallest inertia meeting both the RoCoF and the nadir limit, all other
/// effective parameters held at `p`.
///
/// The nadir limit is inverted by bisection. The nadir is first sampled on
/// an even grid over the bracket; a decrease anywhere aborts with
/// [`SecurityError::NonMonotonic`] instead of returning a wrong root.
pub fn critical_inertia_with(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
    th: &SecurityThresholds,
    opts: &CriticalInertiaOptions,
) -> Result<CriticalInertia, SecurityError> {
    th.validate()?;
    p.validate()?;
    let fault = scn.as_temporary().ok_or_else(|| {
        SecurityError::Unsupported("critical inertia is defined for temporary faults only".into())
    })?;
    fault.validate()?;
    let dp = fault.fault_power().abs();
    let h_rocof = match opts.convention {
        RocofConvention::Published => dp / th.r_th,
        RocofConvention::OdeConsistent => dp / (2.0 * th.r_th),
    };
    let (h_dev, nadir_binding) = nadir_inertia(p, scn, th.omega_th, opts)?;
    Ok(CriticalInertia {
        h_rocof,
        h_dev,
        h_cri: h_rocof.max(h_dev),
        nadir_binding,
    })
}

fn nadir_inertia(
    p: &EffectiveParams,
    scn: &DisturbanceScenario,
    omega_th: f64,
    opts: &CriticalInertiaOptions,
) -> Result<(f64, bool), SecurityError> {
    let (mut lo, mut hi) = (opts.h_min, opts.h_max);
    if let Some((a, b)) = p.underdamped_inertia_range() {
        lo = lo.max(a * (1.0 + 1e-6));
        hi = hi.min(b * (1.0 - 1e-6));
    } else {
        return Err(SecurityError::EmptyBracket { lo, hi });
    }
    if !(lo < hi) {
        return Err(SecurityError::EmptyBracket {
            lo: opts.h_min,
            hi: opts.h_max,
        });
    }
    let nadir =
        |h: f64| -> Result<f64, SecurityError> { Ok(frequency_nadir(&p.with_inertia(h), scn)?.omega) };

    let n = opts.scan_points.max(2);
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let h = if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        };
        grid.push((h, nadir(h)?));
    }
    for w in grid.windows(2) {
        if w[1].1 < w[0].1 - MONOTONE_SLACK {
            return Err(non_monotonic(w[0], w[1]));
        }
    }
    let (h_max, n_max) = grid[n - 1];
    if n_max < omega_th {
        return Err(SecurityError::Bracket {
            h_max,
            nadir: n_max,
            omega_th,
        });
    }
    if grid[0].1 >= omega_th {
        return Ok((lo, false));
    }
    let i = grid
        .iter()
        .position(|&(_, v)| v >= omega_th)
        .expect("last point is feasible");
    let (mut a, mut b) = (grid[i - 1], grid[i]);
    while b.0 - a.0 > opts.tolerance {
        let m = 0.5 * (a.0 + b.0);
        if m <= a.0 || m >= b.0 {
            break;
        }
        let v = nadir(m)?;
        if v < a.1 - MONOTONE_SLACK {
            return Err(non_monotonic(a, (m, v)));
        }
        if v > b.1 + MONOTONE_SLACK {
            return Err(non_monotonic((m, v), b));
        }
        if v >= omega_th {
            b = (m, v);
        } else {
            a = (m, v);
        }
    }
    Ok((b.0, true))
}

fn non_monotonic(low: (f64, f64), high: (f64, f64)) -> SecurityError {
    SecurityError::NonMonotonic {
        h_low: low.0,
        h_high: high.0,
        nadir_low: low.1,
        nadir_high: high.1,
    }
}
