//! Shared helpers of the integration tests: an RK4 reference for the
//! constant-parameter two-state model and random case generators.

#![allow(dead_code)]

use freqsec::enf::{DisturbanceScenario, EffectiveParams, TemporaryFault};
use rand::Rng;

/// Imbalance of a cleared fault, written out from the fault fields.
pub fn forcing(f: &TemporaryFault, t: f64) -> f64 {
    let t_r = f.t_c + 1.0 / f.r_p;
    if t <= f.t_f {
        0.0
    } else if t <= f.t_c {
        let u = f.u_f;
        -f.p_gfl0 + (1.0 - f.a * u * u - f.b * u - f.c) * f.p_load0
    } else if t <= t_r {
        (f.r_p * (t - f.t_c) - 1.0) * f.p_gfl0
    } else {
        0.0
    }
}

/// Classical RK4 on `2H w' = ΔP − D w − g`, `τ g' = K w − g` from rest.
///
/// Each interval between forcing breakpoints is split into equal steps no
/// longer than `dt`, and the forcing is evaluated on the interval's own
/// expression (its midpoint decides which one), so the kinks at the
/// breakpoints are never straddled. Returns `(t, deviation)` after every step.
pub fn rk4_deviation(p: &EffectiveParams, f: &TemporaryFault, t_end: f64, dt: f64) -> Vec<(f64, f64)> {
    let (h, d, k, tau) = (p.h_bar, p.d_bar, p.k_bar, p.tau_bar);
    let t_r = f.t_c + 1.0 / f.r_p;
    let mut edges = vec![0.0, f.t_f, f.t_c, t_r, t_end];
    edges.retain(|&e| e <= t_end);
    edges.dedup();
    let (mut w, mut g) = (0.0_f64, 0.0_f64);
    let mut out = vec![(0.0, 0.0)];
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        // the expression active on (a, b], extended to its closed interval
        let power = |t: f64| -> f64 {
            if mid <= f.t_f || mid > t_r {
                0.0
            } else if mid <= f.t_c {
                forcing(f, mid)
            } else {
                (f.r_p * (t - f.t_c) - 1.0) * f.p_gfl0
            }
        };
        let rhs = |t: f64, w: f64, g: f64| ((power(t) - d * w - g) / (2.0 * h), (k * w - g) / tau);
        let n = ((b - a) / dt).ceil().max(1.0) as usize;
        let step = (b - a) / n as f64;
        for i in 0..n {
            let t0 = a + i as f64 * step;
            let k1 = rhs(t0, w, g);
            let k2 = rhs(t0 + 0.5 * step, w + 0.5 * step * k1.0, g + 0.5 * step * k1.1);
            let k3 = rhs(t0 + 0.5 * step, w + 0.5 * step * k2.0, g + 0.5 * step * k2.1);
            let k4 = rhs(t0 + step, w + step * k3.0, g + step * k3.1);
            w += step / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            g += step / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            let t1 = if i + 1 == n { b } else { a + (i + 1) as f64 * step };
            out.push((t1, w));
        }
    }
    out
}

/// Complex eigenvalues of the system matrix, checked without the library.
pub fn oscillatory(p: &EffectiveParams) -> bool {
    let trace = -(p.d_bar / (2.0 * p.h_bar) + 1.0 / p.tau_bar);
    let det = (p.d_bar + p.k_bar) / (2.0 * p.h_bar * p.tau_bar);
    trace * trace - 4.0 * det < 0.0
}

pub fn random_params<R: Rng>(rng: &mut R) -> EffectiveParams {
    loop {
        let p = EffectiveParams::new_unchecked(
            rng.random_range(2.0..8.0),
            rng.random_range(0.5..8.0),
            rng.random_range(5.0..30.0),
            rng.random_range(0.3..3.0),
        );
        if oscillatory(&p) && p.validate().is_ok() {
            return p;
        }
    }
}

/// A cleared fault with an under-frequency fault-on imbalance of at least
/// 0.02 pu.
pub fn random_fault<R: Rng>(rng: &mut R) -> TemporaryFault {
    loop {
        let a: f64 = rng.random_range(0.0..1.0);
        let b: f64 = rng.random_range(0.0..1.0 - a);
        let t_f = rng.random_range(0.5..1.5);
        let f = TemporaryFault {
            t_f,
            t_c: t_f + rng.random_range(0.02..0.3),
            r_p: rng.random_range(0.5..5.0),
            p_gfl0: rng.random_range(0.05..0.5),
            p_load0: rng.random_range(0.3..1.2),
            u_f: rng.random_range(0.3..0.95),
            a,
            b,
            c: 1.0 - a - b,
        };
        if forcing(&f, 0.5 * (f.t_f + f.t_c)) <= -0.02 && f.validate().is_ok() {
            return f;
        }
    }
}

pub fn temporary(f: TemporaryFault) -> DisturbanceScenario {
    DisturbanceScenario::Temporary(f)
}

/// Lowest sample of `g` on an even grid over `[a, b]` with spacing at most
/// `step` (the end point included), as `(t, value)`.
pub fn grid_argmin(a: f64, b: f64, step: f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let mut best = (a, g(a));
    for i in 1..=n {
        let t = if i == n { b } else { a + i as f64 * step };
        let v = g(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}
