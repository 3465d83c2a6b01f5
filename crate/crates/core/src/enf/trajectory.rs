use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EnfError, EnfResponse};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub omega: f64,
}

/// Sampled nodal frequency of one node under one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub node_id: String,
    /// Name of the scenario the samples belong to, if known.
    #[serde(default)]
    pub meta: Option<String>,
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(node_id: impl Into<String>, samples: Vec<Sample>) -> Result<Self, EnfError> {
        if samples.iter().any(|s| !s.t.is_finite() || !s.omega.is_finite()) {
            return Err(EnfError::InvalidTrajectory("non-finite sample".into()));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(EnfError::InvalidTrajectory(format!(
                "time stamps must increase strictly (index {} -> {})",
                i,
                i + 1
            )));
        }
        Ok(Self {
            node_id: node_id.into(),
            meta: None,
            samples,
        })
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = Some(meta.into());
        self
    }

    /// Samples the closed-form response on `times`.
    pub fn from_response(
        node_id: impl Into<String>,
        response: &EnfResponse,
        times: impl IntoIterator<Item = f64>,
    ) -> Result<Self, EnfError> {
        let samples = times
            .into_iter()
            .map(|t| Sample {
                t,
                omega: response.omega(t),
            })
            .collect();
        Self::new(node_id, samples)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_time(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    /// Smallest spacing between consecutive samples.
    pub fn min_spacing(&self) -> Option<f64> {
        self.samples.windows(2).map(|w| w[1].t - w[0].t).reduce(f64::min)
    }

    /// Replaces the frequency values, keeping time stamps.
    pub fn map_omega(&self, mut f: impl FnMut(usize, &Sample) -> f64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| Sample {
                t: s.t,
                omega: f(i, s),
            })
            .collect();
        Self {
            node_id: self.node_id.clone(),
            meta: self.meta.clone(),
            samples,
        }
    }

    /// Linear interpolation; `None` outside the sampled span.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|x| x.t < t);
        if s[i].t == t {
            return Some(s[i].omega);
        }
        let (l, r) = (s[i - 1], s[i]);
        Some(l.omega + (r.omega - l.omega) * (t - l.t) / (r.t - l.t))
    }

    /// Writes `t,omega` CSV (6 and 9 decimals).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EnfError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "omega"])?;
        for s in &self.samples {
            w.write_record([format!("{:.6}", s.t), format!("{:.9}", s.omega)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(node_id: impl Into<String>, reader: R) -> Result<Self, EnfError> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "omega" {
            return Err(EnfError::InvalidTrajectory(format!(
                "expected header `t,omega`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for record in r.deserialize::<Sample>() {
            samples.push(record?);
        }
        Self::new(node_id, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Trajectory {
        let samples = (0..5)
            .map(|i| Sample {
                t: i as f64 * 0.5,
                omega: 1.0 - 0.001 * i as f64,
            })
            .collect();
        Trajectory::new("n1", samples).unwrap()
    }

    #[test]
    fn rejects_non_increasing_time() {
        let s = vec![Sample { t: 0.0, omega: 1.0 }, Sample { t: 0.0, omega: 1.0 }];
        assert!(Trajectory::new("x", s).is_err());
    }

    #[test]
    fn interpolation() {
        let tr = ramp();
        assert_eq!(tr.value_at(0.5), Some(0.999));
        assert!((tr.value_at(0.75).unwrap() - 0.9985).abs() < 1e-15);
        assert_eq!(tr.value_at(-0.1), None);
        assert_eq!(tr.value_at(2.01), None);
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        ramp().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,omega"));
        assert_eq!(lines.next(), Some("0.000000,1.000000000"));
        assert_eq!(lines.next(), Some("0.500000,0.999000000"));
        let back = Trajectory::read_csv("n1", buf.as_slice()).unwrap();
        assert_eq!(back.samples(), ramp().samples());
    }

    #[test]
    fn csv_header_is_checked() {
        let err = Trajectory::read_csv("n", "time,f\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EnfError::InvalidTrajectory(_)));
    }
}
