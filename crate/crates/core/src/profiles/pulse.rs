use serde::{Deserialize, Serialize};

use super::CurrentProfile;

/// Pulse-test design: one profile per excitation duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseConfig {
    /// Excitation durations, s.
    pub durations: Vec<f64>,
    /// Rest after each excitation, s.
    pub rest: f64,
    /// Zero-current padding before the excitation, s.
    pub pre_rest: f64,
    pub c_rate: f64,
    pub nominal_capacity_mah: f64,
    pub sample_rate_hz: f64,
    /// Discharge pulses when true, charge pulses otherwise.
    pub discharge: bool,
    /// State of charge at the start of each pulse.
    pub start_soc: f64,
    /// Length of the instantaneous window after each current edge, s.
    pub inst_window: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            durations: vec![15.0, 30.0, 60.0, 120.0],
            rest: 100.0,
            pre_rest: 5.0,
            c_rate: 1.0,
            nominal_capacity_mah: 2200.0,
            sample_rate_hz: 10.0,
            discharge: true,
            start_soc: 0.6,
            inst_window: 1.0,
        }
    }
}

impl PulseConfig {
    /// Pulse amplitude, A (signed).
    pub fn amplitude(&self) -> f64 {
        let a = self.c_rate * self.nominal_capacity_mah * 1e-3;
        if self.discharge {
            a
        } else {
            -a
        }
    }

    /// Number of samples spanning `seconds`.
    pub fn samples_in(&self, seconds: f64) -> usize {
        (seconds * self.sample_rate_hz).round() as usize
    }
}

/// Builds the four pulse profiles.
pub fn gen_pulse_set(cfg: &PulseConfig) -> Vec<CurrentProfile> {
    let dt = 1.0 / cfg.sample_rate_hz;
    let amp = cfg.amplitude();
    cfg.durations
        .iter()
        .map(|&d| {
            let mut s = vec![0.0; cfg.samples_in(cfg.pre_rest)];
            s.extend(std::iter::repeat_n(amp, cfg.samples_in(d)));
            s.extend(std::iter::repeat_n(0.0, cfg.samples_in(cfg.rest)));
            CurrentProfile {
                dt,
                samples: s,
                label: format!("pulse {d} s"),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set() {
        let cfg = PulseConfig::default();
        let set = gen_pulse_set(&cfg);
        assert_eq!(set.len(), 4);
        let total: f64 = set.iter().map(|p| p.duration()).sum();
        assert!((total - 645.0).abs() < 1e-9);
        for (p, d) in set.iter().zip([15.0, 30.0, 60.0, 120.0]) {
            let on = p.samples.iter().filter(|&&s| s != 0.0).count();
            assert!((on as f64 * p.dt - d).abs() < 1e-9);
            assert!(p.samples.iter().all(|&s| s == 0.0 || s == 2.2));
        }
    }
}
