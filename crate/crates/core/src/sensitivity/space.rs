use serde::{Deserialize, Serialize};

use super::SensitivityError;
use crate::model::TransportParams;

/// The transport parameters that the pulse test identifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransportParam {
    ContactResistance,
    SolidConductivityNeg,
    SolidConductivityPos,
    SolidDiffusivityNeg,
    SolidDiffusivityPos,
    ElectrolyteDiffusivity,
    IonicConductivity,
    Transference,
}

impl TransportParam {
    pub const ALL: [TransportParam; 8] = [
        TransportParam::ContactResistance,
        TransportParam::SolidConductivityNeg,
        TransportParam::SolidConductivityPos,
        TransportParam::SolidDiffusivityNeg,
        TransportParam::SolidDiffusivityPos,
        TransportParam::ElectrolyteDiffusivity,
        TransportParam::IonicConductivity,
        TransportParam::Transference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TransportParam::ContactResistance => "contact_resistance",
            TransportParam::SolidConductivityNeg => "solid_conductivity_neg",
            TransportParam::SolidConductivityPos => "solid_conductivity_pos",
            TransportParam::SolidDiffusivityNeg => "ds_factor_neg",
            TransportParam::SolidDiffusivityPos => "ds_factor_pos",
            TransportParam::ElectrolyteDiffusivity => "de_factor",
            TransportParam::IonicConductivity => "kappa_factor",
            TransportParam::Transference => "transference",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Sampling range used for sensitivity analysis and identification.
    pub fn default_bounds(&self) -> (f64, f64) {
        match self {
            TransportParam::ContactResistance => (0.0, 0.05),
            TransportParam::SolidConductivityNeg => (6.6, 100.0),
            TransportParam::SolidConductivityPos => (0.2, 3.0),
            TransportParam::SolidDiffusivityNeg
            | TransportParam::SolidDiffusivityPos
            | TransportParam::ElectrolyteDiffusivity
            | TransportParam::IonicConductivity => (0.1, 1.5),
            TransportParam::Transference => (0.2, 0.45),
        }
    }

    pub fn get(&self, t: &TransportParams) -> f64 {
        match self {
            TransportParam::ContactResistance => t.contact_resistance,
            TransportParam::SolidConductivityNeg => t.solid_conductivity_neg,
            TransportParam::SolidConductivityPos => t.solid_conductivity_pos,
            TransportParam::SolidDiffusivityNeg => t.ds_factor_neg,
            TransportParam::SolidDiffusivityPos => t.ds_factor_pos,
            TransportParam::ElectrolyteDiffusivity => t.de_factor,
            TransportParam::IonicConductivity => t.kappa_factor,
            TransportParam::Transference => t.transference,
        }
    }

    pub fn set(&self, t: &mut TransportParams, v: f64) {
        let slot = match self {
            TransportParam::ContactResistance => &mut t.contact_resistance,
            TransportParam::SolidConductivityNeg => &mut t.solid_conductivity_neg,
            TransportParam::SolidConductivityPos => &mut t.solid_conductivity_pos,
            TransportParam::SolidDiffusivityNeg => &mut t.ds_factor_neg,
            TransportParam::SolidDiffusivityPos => &mut t.ds_factor_pos,
            TransportParam::ElectrolyteDiffusivity => &mut t.de_factor,
            TransportParam::IonicConductivity => &mut t.kappa_factor,
            TransportParam::Transference => &mut t.transference,
        };
        *slot = v;
    }
}

impl std::fmt::Display for TransportParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Box of admissible parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub params: Vec<TransportParam>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Default for ParamSpace {
    /// All eight transport parameters over their default ranges.
    fn default() -> Self {
        Self::of(&TransportParam::ALL)
    }
}

impl ParamSpace {
    pub fn of(params: &[TransportParam]) -> Self {
        let (lower, upper) = params.iter().map(|p| p.default_bounds()).unzip();
        ParamSpace {
            params: params.to_vec(),
            lower,
            upper,
        }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn validate(&self) -> Result<(), SensitivityError> {
        let p = self.params.len();
        if p == 0 || self.lower.len() != p || self.upper.len() != p {
            return Err(SensitivityError::Space("bounds must match the parameter list".into()));
        }
        for k in 0..p {
            if !(self.lower[k] < self.upper[k]) {
                return Err(SensitivityError::Space(format!(
                    "{}: lower {} not below upper {}",
                    self.params[k], self.lower[k], self.upper[k]
                )));
            }
        }
        Ok(())
    }

    /// Maps a point of the unit cube onto the box.
    pub fn scale(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .enumerate()
            .map(|(k, u)| self.lower[k] + u * (self.upper[k] - self.lower[k]))
            .collect()
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        0.5 * (self.lower[k] + self.upper[k])
    }

    /// Writes `values` into a copy of `base`.
    pub fn apply(&self, base: &TransportParams, values: &[f64]) -> TransportParams {
        let mut t = base.clone();
        for (p, &v) in self.params.iter().zip(values) {
            p.set(&mut t, v);
        }
        t
    }
}
