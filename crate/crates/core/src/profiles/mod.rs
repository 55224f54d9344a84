//! Test-current generators and response segmentation.

mod pulse;
mod quasi_static;
mod segment;

pub use pulse::{gen_pulse_set, PulseConfig};
pub use quasi_static::{find_stoich_for_ocv, gen_quasi_static, QuasiStaticConfig};
pub use segment::{segment_trace, CutPoints, PulseSet, Regime, SegmentId, SegmentedTrace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile shape: {0}")]
    Shape(String),
    #[error("invalid profile configuration: {0}")]
    Config(String),
    #[error("trace and profile are misaligned: {0}")]
    Alignment(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Piecewise-constant current sampled at a fixed interval.
///
/// Sample `k` is the current (A, discharge positive) applied over
/// `(k dt, (k+1) dt]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentProfile {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub label: String,
}

impl CurrentProfile {
    pub fn new(dt: f64, samples: Vec<f64>, label: impl Into<String>) -> Result<Self, ProfileError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ProfileError::Config(format!("sample interval {dt} must be positive")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(ProfileError::Config("non-finite current sample".into()));
        }
        Ok(CurrentProfile {
            dt,
            samples,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time stamp of each sample (end of its interval), s.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.samples.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Net charge drawn, As.
    pub fn charge(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dt
    }

    /// Two columns, `time_s,current_A`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_s,current_A\n");
        for (t, i) in self.times().iter().zip(&self.samples) {
            s.push_str(&format!("{t:.8e},{i:.8e}\n"));
        }
        s
    }

    /// Reads the format written by `to_csv`. Samples must be evenly spaced.
    pub fn from_csv(text: &str, label: &str) -> Result<Self, ProfileError> {
        let mut time = Vec::new();
        let mut current = Vec::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "time_s,current_A" => {}
            _ => return Err(ProfileError::Shape("expected header time_s,current_A".into())),
        }
        for (n, line) in lines {
            let mut f = line.split(',').map(|v| v.trim().parse::<f64>());
            match (f.next(), f.next(), f.next()) {
                (Some(Ok(t)), Some(Ok(i)), None) => {
                    time.push(t);
                    current.push(i);
                }
                _ => return Err(ProfileError::Shape(format!("line {}: expected two numbers", n + 1))),
            }
        }
        let trace = crate::model::VoltageTrace {
            voltage: vec![0.0; time.len()],
            time,
            current,
        };
        Self::from_trace(&trace, label)
    }

    /// Rebuilds a profile from a trace's time and current columns.
    pub fn from_trace(trace: &crate::model::VoltageTrace, label: &str) -> Result<Self, ProfileError> {
        if trace.time.len() < 2 {
            return Err(ProfileError::Shape("trace too short to infer the sample interval".into()));
        }
        let dt = trace.time[1] - trace.time[0];
        for (k, w) in trace.time.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(ProfileError::Shape(format!(
                    "uneven sampling at index {}",
                    k + 1
                )));
            }
        }
        Self::new(dt, trace.current.clone(), label)
    }
}
