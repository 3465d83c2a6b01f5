use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop once `f(worst) − f(best)` drops below this.
    pub spread_tolerance: f64,
    /// Relative size of the initial simplex edges.
    pub initial_step: f64,
    /// Further runs started from the best vertex after convergence.
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
    /// A restart that lowers the best value by less than this fraction ends
    /// the search.
    #[serde(default = "default_restart_gain")]
    pub restart_gain: f64,
}

fn default_restarts() -> usize {
    30
}

fn default_restart_gain() -> f64 {
    1e-3
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            spread_tolerance: 1e-10,
            initial_step: 0.1,
            max_restarts: default_restarts(),
            restart_gain: default_restart_gain(),
        }
    }
}

impl SimplexOptions {
    /// Tighter spread and a larger budget for losses far below 1e-10.
    pub fn precise() -> Self {
        Self {
            max_iterations: 5000,
            spread_tolerance: 1e-14,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best value before the first iteration and after each one.
    pub trace: Vec<f64>,
    pub restarts: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(c: &[f64], x: &[f64], t: f64) -> Vec<f64> {
    c.iter().zip(x).map(|(c, x)| c + t * (x - c)).collect()
}

/// Nelder-Mead minimisation of `f` from `x0`.
///
/// The initial simplex is `x0` plus one vertex per coordinate scaled by
/// `1 + initial_step` (an absolute step of 2.5e-4 for zero coordinates).
/// A collapsed simplex on a flat loss can stall far from the minimum, so the
/// search is restarted from the best vertex while a restart still lowers the
/// best value by more than `restart_gain` (relative), at most `max_restarts`
/// times.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    let mut out = single_run(&mut f, x0, opts);
    while out.restarts < opts.max_restarts
        && out.iterations < opts.max_iterations
        && out.f >= opts.spread_tolerance
    {
        let budget = SimplexOptions {
            max_iterations: opts.max_iterations - out.iterations,
            ..*opts
        };
        let next = single_run(&mut f, &out.x, &budget);
        let gain = out.f - next.f;
        out.iterations += next.iterations;
        out.trace.extend_from_slice(&next.trace[1..]);
        out.restarts += 1;
        out.converged = next.converged;
        if next.f < out.f {
            out.x = next.x;
            out.f = next.f;
        }
        if !(gain > opts.restart_gain * out.f.abs().max(f64::MIN_POSITIVE)) {
            break;
        }
    }
    out
}

fn single_run<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = if x[i] != 0.0 {
            x[i] * (1.0 + opts.initial_step)
        } else {
            2.5e-4
        };
        let v = f(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);
    let mut trace = vec![simplex[0].1];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        if simplex[n].1 - simplex[0].1 < opts.spread_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let xr = lerp(&centroid, &worst, -REFLECT);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &worst, -EXPAND);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < f_worst {
                let xc = lerp(&centroid, &xr, CONTRACT);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst, CONTRACT);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fr.min(f_worst) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = lerp(&best, &v.0, SHRINK);
                    v.1 = f(&v.0);
                }
            }
        }
        order(&mut simplex);
        trace.push(simplex[0].1);
    }
    if !converged && simplex[n].1 - simplex[0].1 < opts.spread_tolerance {
        converged = true;
    }
    let (x, fx) = simplex.swap_remove(0);
    SimplexOutcome {
        x,
        f: fx,
        iterations,
        converged,
        trace,
        restarts: 0,
    }
}
