use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::identify::{AgingCoefficients, SsoConfig, StaticIdConfig};
use crate::model::CellParameters;
use crate::profiles::{PulseConfig, QuasiStaticConfig};
use crate::sensitivity::ParamSpace;

/// Environment variable that overrides `harness.seed`.
pub const SEED_ENV: &str = "CELLIDENT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Synthetic measurements from the reference stage tables.
    Twin,
    /// Measurements read from trace files.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfilesSection {
    pub quasi_static: QuasiStaticConfig,
    pub pulses: PulseConfig,
    /// Approved voltage window, V.
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        ProfilesSection {
            quasi_static: QuasiStaticConfig::default(),
            pulses: PulseConfig::default(),
            v_min: 2.5,
            v_max: 4.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivitySection {
    /// Base sample count.
    pub m: usize,
    /// Parameters whose largest index stays below this are dropped.
    pub drop_threshold: f64,
    pub space: ParamSpace,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        SensitivitySection {
            m: 1000,
            drop_threshold: 0.01,
            space: ParamSpace::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolversSection {
    pub quasi_static: StaticIdConfig,
    pub aging: AgingCoefficients,
}

impl Default for SolversSection {
    fn default() -> Self {
        SolversSection {
            quasi_static: StaticIdConfig::default(),
            aging: AgingCoefficients::nmc811_graphite(),
        }
    }
}

/// Trace files for measured mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPaths {
    pub quasi_static: PathBuf,
    pub pulses: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessSection {
    pub mode: RunMode,
    /// Degradation stages (cycle counts) run in twin mode.
    pub stages: Vec<u32>,
    /// Measurement noise added to twin voltages, V.
    pub noise_sigma: f64,
    pub seed: u64,
    pub measured: Option<MeasuredPaths>,
    /// Also run the single joint global search for comparison.
    pub baseline: bool,
}

impl Default for HarnessSection {
    fn default() -> Self {
        HarnessSection {
            mode: RunMode::Twin,
            stages: vec![0, 500, 1000, 1500, 2000],
            noise_sigma: 0.0,
            seed: 42,
            measured: None,
            baseline: false,
        }
    }
}

/// Everything a run needs. Missing sections take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    /// Fresh-cell parameters. Composition values double as the nominal
    /// point of the quasi-static search.
    pub cell: CellParameters,
    pub profiles: ProfilesSection,
    pub sensitivity: SensitivitySection,
    pub solvers: SolversSection,
    pub sso: SsoConfig,
    pub harness: HarnessSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the seed override from the
    /// environment.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `CELLIDENT_SEED` if it is set.
    pub fn apply_env(&mut self) -> Result<(), HarnessError> {
        if let Ok(s) = std::env::var(SEED_ENV) {
            let seed = s.trim().parse().map_err(|_| HarnessError::Config(format!("{SEED_ENV}={s} is not an integer")))?;
            self.set_seed(seed);
        }
        Ok(())
    }

    /// One seed drives the noise, the global searches and the random
    /// draws.
    pub fn set_seed(&mut self, seed: u64) {
        self.harness.seed = seed;
        self.sso.seed = seed;
        self.solvers.quasi_static.solver.seed = seed;
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let h = &self.harness;
        if !(h.noise_sigma >= 0.0 && h.noise_sigma.is_finite()) {
            return Err(HarnessError::Config(format!("noise sigma {} must be non-negative", h.noise_sigma)));
        }
        if !(self.profiles.v_min < self.profiles.v_max) {
            return Err(HarnessError::Config("v_min must be below v_max".into()));
        }
        if self.sensitivity.m == 0 {
            return Err(HarnessError::Config("sensitivity sample count must be positive".into()));
        }
        self.sensitivity.space.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.cell.validate()?;
        if h.mode == RunMode::Measured {
            let Some(m) = &h.measured else {
                return Err(HarnessError::Config("measured mode needs trace paths".into()));
            };
            if m.pulses.is_empty() {
                return Err(HarnessError::Config("measured mode needs at least one pulse trace".into()));
            }
            for p in std::iter::once(&m.quasi_static).chain(&m.pulses) {
                if !p.is_file() {
                    return Err(HarnessError::Config(format!("{} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.sensitivity.m = 64;
        cfg.harness.stages = vec![0, 2000];
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn negative_noise_is_rejected() {
        let e = RunConfig::from_json(r#"{"harness": {"noise_sigma": -1e-3}}"#).unwrap_err();
        assert!(matches!(e, HarnessError::Config(_)));
    }

    #[test]
    fn measured_mode_needs_existing_files() {
        let text = r#"{"harness": {"mode": "measured", "measured": {"quasi_static": "/nonexistent/qs.csv", "pulses": []}}}"#;
        assert!(RunConfig::from_json(text).is_err());
    }

    #[test]
    fn bad_json_reports_line() {
        match RunConfig::from_json("{\n  \"harness\": {\n    \"seed\": \"x\"\n  }\n}") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
