//! Minimum-frequency times of the individual branches.
//!
//! Zero-slope branches (fault-on, post-fault, permanent step) have stationary
//! points at `ω_d·s = atan(P/Q) + kπ`; the ramp-recovery branch is seeded by
//! a second-order Taylor expansion of its stationarity condition and refined
//! with Newton steps on the exact derivative. Every search ends by comparing
//! the candidate interior extrema against the branch end points.

use std::f64::consts::PI;

use crate::enf::{BoundaryState, Branch, ClosedFormConstants, Phase, TemporaryFault};

const NEWTON_ITERATIONS: usize = 10;

fn fault_on_branch(c: &ClosedFormConstants, f: &TemporaryFault) -> Branch {
    Branch {
        phase: Phase::FaultOn,
        start: f.t_f,
        end: f.t_c,
        slope: 0.0,
        offset: c.k2,
        a: -c.k2,
        b: c.k2 * c.a1,
        lambda: c.lambda,
        omega_d: c.omega_d,
    }
}

fn recovery_branch(c: &ClosedFormConstants, f: &TemporaryFault) -> Branch {
    Branch {
        phase: Phase::Recovery,
        start: f.t_c,
        end: f.t_r(),
        slope: c.c1,
        offset: c.c2,
        a: c.a_cos,
        b: c.a_sin,
        lambda: c.lambda,
        omega_d: c.omega_d,
    }
}

fn post_fault_branch(c: &ClosedFormConstants, f: &TemporaryFault, at_r: BoundaryState) -> Branch {
    Branch {
        phase: Phase::PostFault,
        start: f.t_r(),
        end: f64::INFINITY,
        slope: 0.0,
        offset: 0.0,
        a: at_r.deviation,
        b: (at_r.derivative + c.lambda * at_r.deviation) / c.omega_d,
        lambda: c.lambda,
        omega_d: c.omega_d,
    }
}

pub(crate) fn negated(b: &Branch) -> Branch {
    Branch {
        slope: -b.slope,
        offset: -b.offset,
        a: -b.a,
        b: -b.b,
        ..*b
    }
}

/// Time in `candidates` with the smallest deviation; ties keep the earliest.
fn lowest(branch: &Branch, candidates: impl IntoIterator<Item = f64>) -> f64 {
    let mut best = (f64::NAN, f64::INFINITY);
    for t in candidates {
        let v = branch.deviation(t);
        if v < best.1 || (v == best.1 && t < best.0) {
            best = (t, v);
        }
    }
    best.0
}

/// Phase offset `x₀` of the stationary points `x₀ + kπ` of a zero-slope
/// branch, or `None` if the branch is constant.
fn stationary_phase(b: &Branch) -> Option<f64> {
    let (p, q) = b.derivative_coefficients();
    if p == 0.0 && q == 0.0 {
        return None;
    }
    Some(if q == 0.0 { 0.5 * PI } else { (p / q).atan() })
}

/// Stationary point number `k` of a zero-slope branch, absolute time.
fn stationary_time(b: &Branch, x0: f64, k: f64) -> f64 {
    b.start + (x0 + k * PI) / b.omega_d
}

/// Smallest `k` with `stationary_time(k) ≥ from` (or `> from` when `strict`).
fn first_index(b: &Branch, x0: f64, from: f64, strict: bool) -> f64 {
    let admissible = |k: f64| {
        let t = stationary_time(b, x0, k);
        if strict {
            t > from
        } else {
            t >= from
        }
    };
    let mut k = ((b.omega_d * (from - b.start) - x0) / PI).ceil();
    while admissible(k - 1.0) {
        k -= 1.0;
    }
    while !admissible(k) {
        k += 1.0;
    }
    k
}

/// Minimum of a zero-slope branch over `[start, end]`: all stationary points
/// from the smallest admissible `k` onward, plus both end points.
pub(crate) fn bounded_oscillatory_argmin(b: &Branch) -> f64 {
    let mut candidates = vec![b.start, b.end];
    if let Some(x0) = stationary_phase(b) {
        let mut k = first_index(b, x0, b.start, false);
        loop {
            let t = stationary_time(b, x0, k);
            if t > b.end {
                break;
            }
            candidates.push(t);
            k += 1.0;
        }
    }
    lowest(b, candidates)
}

/// Minimum of a zero-slope branch on `[start, ∞)`. The oscillation decays,
/// so the first two stationary points after the start and the start itself
/// cover every candidate.
pub(crate) fn unbounded_oscillatory_argmin(b: &Branch) -> f64 {
    let mut candidates = vec![b.start];
    if let Some(x0) = stationary_phase(b) {
        let k = first_index(b, x0, b.start, true);
        candidates.push(stationary_time(b, x0, k));
        candidates.push(stationary_time(b, x0, k + 1.0));
    }
    lowest(b, candidates)
}

/// Root of `E0 − E1·τ + E2·τ² = 0` closest to zero on the branch given by
/// `(E1 − √(E1² − 4·E2·E0)) / (2·E2)`, evaluated in the cancellation-free
/// form `2·E0 / (E1 + √(E1² − 4·E2·E0))`, which reduces to `E0/E1` as
/// `E2 → 0`. `None` if the discriminant is negative or the root is undefined.
pub fn taylor_seed(e0: f64, e1: f64, e2: f64) -> Option<f64> {
    let disc = e1 * e1 - 4.0 * e2 * e0;
    if disc < 0.0 {
        return None;
    }
    let denom = e1 + disc.sqrt();
    if denom != 0.0 {
        let tau = 2.0 * e0 / denom;
        return tau.is_finite().then_some(tau);
    }
    // E1 ≤ 0 with E1² = disc: the other form is well conditioned.
    if e2 != 0.0 {
        let tau = (e1 - disc.sqrt()) / (2.0 * e2);
        return tau.is_finite().then_some(tau);
    }
    None
}

/// Quadratic coefficients `(E0, E1, E2)` of the stationarity condition
/// `e^{−λτ}·cos(ω_d·τ + α) = γ` of the recovery branch, expanded to second
/// order about the start of the branch.
pub fn recovery_taylor_coefficients(b: &Branch) -> Option<(f64, f64, f64)> {
    let (p, q) = b.derivative_coefficients();
    let r = p.hypot(q);
    if r == 0.0 {
        return None;
    }
    let alpha = q.atan2(p);
    let gamma = -b.slope / r;
    let (l, w) = (b.lambda, b.omega_d);
    let (sa, ca) = alpha.sin_cos();
    let e0 = ca - gamma;
    let e1 = l * ca + w * sa;
    let e2 = 0.5 * ((l * l - w * w) * ca + 2.0 * l * w * sa);
    Some((e0, e1, e2))
}

fn newton(b: &Branch, mut t: f64) -> Option<f64> {
    for _ in 0..NEWTON_ITERATIONS {
        let d1 = b.derivative(t);
        let d2 = b.second_derivative(t);
        if d2 == 0.0 || !d2.is_finite() {
            return None;
        }
        let step = d1 / d2;
        t -= step;
        if step.abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    t.is_finite().then_some(t)
}

/// Bracketed root of the derivative on `[lo, hi]` (sign change assumed):
/// Newton steps that stay inside the bracket, bisection otherwise.
fn bracketed_root(b: &Branch, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = b.derivative(lo);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = b.derivative(t);
        if f == 0.0 {
            return t;
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = t;
            f_lo = f;
        } else {
            hi = t;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let d2 = b.second_derivative(t);
        let newton = t - f / d2;
        t = if d2 != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    t
}

/// Minimum of the recovery branch on `[t_c, t_r]`.
///
/// The Taylor seed gives the primary interior candidate after Newton
/// refinement. A sign scan of the exact derivative at a fraction of the
/// oscillation period adds any further stationary point, so long ramps that
/// span several swings are handled as well.
pub(crate) fn recovery_argmin(b: &Branch) -> f64 {
    let mut candidates = vec![b.start, b.end];
    if let Some(t) = recovery_taylor_coefficients(b)
        .and_then(|(e0, e1, e2)| taylor_seed(e0, e1, e2))
        .and_then(|tau| newton(b, b.start + tau))
    {
        if t >= b.start && t <= b.end && b.derivative(t).abs() <= 1e-9 {
            candidates.push(t);
        }
    }
    let span = b.end - b.start;
    let cells = ((span * b.omega_d / (PI / 8.0)).ceil() as usize).clamp(8, 100_000);
    let h = span / cells as f64;
    let mut prev = (b.start, b.derivative(b.start));
    for i in 1..=cells {
        let t = if i == cells { b.end } else { b.start + i as f64 * h };
        let d = b.derivative(t);
        if d == 0.0 {
            candidates.push(t);
        } else if prev.1 != 0.0 && (d < 0.0) != (prev.1 < 0.0) {
            candidates.push(bracketed_root(b, prev.0, t));
        }
        prev = (t, d);
    }
    lowest(b, candidates)
}

/// Time of the lowest frequency during the fault-on phase, `t_m2`.
pub fn nadir_time_fault_on(c: &ClosedFormConstants, fault: &TemporaryFault) -> f64 {
    bounded_oscillatory_argmin(&fault_on_branch(c, fault))
}

/// Time of the lowest frequency during the ramp-recovery phase, `t_m3`.
pub fn nadir_time_recovery(c: &ClosedFormConstants, fault: &TemporaryFault) -> f64 {
    recovery_argmin(&recovery_branch(c, fault))
}

/// Time of the lowest frequency after the ramp completes, `t_m4`, given the
/// deviation and slope at `t_r`.
pub fn nadir_time_post_fault(c: &ClosedFormConstants, fault: &TemporaryFault, at_r: BoundaryState) -> f64 {
    unbounded_oscillatory_argmin(&post_fault_branch(c, fault, at_r))
}
