use super::FitError;
use crate::enf::{Sample, Trajectory};

/// Centered moving average over `window` seconds.
///
/// Each sample is replaced by the mean of all samples within `window/2` of
/// it, so the window shrinks near both ends. Time stamps are kept.
pub fn filter_trajectory(traj: &Trajectory, window: f64) -> Result<Trajectory, FitError> {
    let s = traj.samples();
    if s.is_empty() {
        return Err(FitError::EmptyTrajectory);
    }
    let half = 0.5 * window.max(0.0) + 1e-12;
    // averaging offsets from a reference keeps constant stretches exact
    let reference = s[0].omega;
    let (mut lo, mut hi) = (0, 0);
    let mut out = Vec::with_capacity(s.len());
    for (i, x) in s.iter().enumerate() {
        while s[lo].t < x.t - half {
            lo += 1;
        }
        while hi + 1 < s.len() && s[hi + 1].t <= x.t + half {
            hi += 1;
        }
        hi = hi.max(i);
        let sum: f64 = s[lo..=hi].iter().map(|y| y.omega - reference).sum();
        out.push(Sample {
            t: x.t,
            omega: reference + sum / (hi - lo + 1) as f64,
        });
    }
    let mut f = Trajectory::new(traj.node_id.clone(), out)?;
    f.meta = traj.meta.clone();
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn traj(values: impl Iterator<Item = f64>, dt: f64) -> Trajectory {
        let s = values
            .enumerate()
            .map(|(i, omega)| Sample {
                t: i as f64 * dt,
                omega,
            })
            .collect();
        Trajectory::new("n", s).unwrap()
    }

    #[test]
    fn constant_is_unchanged() {
        let t = traj(std::iter::repeat_n(0.9973, 500), 1e-3);
        assert_eq!(filter_trajectory(&t, 0.05).unwrap(), t);
    }

    #[test]
    fn spacing_window_is_identity() {
        let t = traj((0..300).map(|i| 1.0 + (i as f64 * 0.37).sin() * 1e-3), 1e-3);
        assert_eq!(filter_trajectory(&t, 1e-3).unwrap(), t);
    }

    #[test]
    fn noise_is_reduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = Normal::new(0.0, 1e-3).unwrap();
        let t = traj((0..5000).map(|_| 1.0 + n.sample(&mut rng)), 1e-3);
        let f = filter_trajectory(&t, 0.05).unwrap();
        let std = |t: &Trajectory| {
            let v: Vec<f64> = t.samples()[100..4900].iter().map(|s| s.omega - 1.0).collect();
            (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
        };
        assert!(std(&f) <= 0.4 * std(&t), "{} vs {}", std(&f), std(&t));
    }

    #[test]
    fn truncated_windows_at_the_ends() {
        let t = traj([0.0, 1.0, 2.0, 3.0, 4.0].into_iter(), 1.0);
        let f = filter_trajectory(&t, 2.0).unwrap();
        let v: Vec<f64> = f.samples().iter().map(|s| s.omega).collect();
        assert_eq!(v, vec![0.5, 1.0, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn empty_is_an_error() {
        let t = Trajectory::new("n", vec![]).unwrap();
        assert!(matches!(
            filter_trajectory(&t, 0.05),
            Err(FitError::EmptyTrajectory)
        ));
    }
}
