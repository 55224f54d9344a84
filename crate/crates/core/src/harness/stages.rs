use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::identify::AgingObservation;
use crate::model::{CellParameters, StoichPair};

/// True composition of the reference cell after a number of cycles.
/// Transport parameters stay at their nominal values at every stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationStage {
    pub cycles: u32,
    /// Reference rest state; fixes the lithium inventory.
    pub stoich_neg: f64,
    pub stoich_pos: f64,
    pub eps_s_neg: f64,
    pub eps_s_pos: f64,
    pub eps_e_neg: f64,
    /// Ω·m²
    pub film_resistance_neg: f64,
    pub film_resistance_pos: f64,
}

const TABLE: [(u32, f64, f64, f64, f64, f64, f64, f64); 5] = [
    (0, 0.486, 0.536, 0.665, 0.519, 0.2827, 3.34e-4, 1.46e-4),
    (500, 0.482, 0.535, 0.655, 0.516, 0.2762, 19.26e-4, 15.45e-4),
    (1000, 0.480, 0.534, 0.645, 0.515, 0.2720, 29.80e-4, 21.86e-4),
    (1500, 0.478, 0.533, 0.635, 0.514, 0.2686, 38.28e-4, 26.78e-4),
    (2000, 0.477, 0.532, 0.624, 0.513, 0.2656, 45.56e-4, 30.93e-4),
];

impl DegradationStage {
    /// The five reference stages, fresh first.
    pub fn table() -> Vec<DegradationStage> {
        TABLE
            .iter()
            .map(|&(cycles, sn, sp, en, ep, een, rfn, rfp)| DegradationStage {
                cycles,
                stoich_neg: sn,
                stoich_pos: sp,
                eps_s_neg: en,
                eps_s_pos: ep,
                eps_e_neg: een,
                film_resistance_neg: rfn,
                film_resistance_pos: rfp,
            })
            .collect()
    }

    pub fn at(cycles: u32) -> Result<DegradationStage, HarnessError> {
        Self::table()
            .into_iter()
            .find(|s| s.cycles == cycles)
            .ok_or(HarnessError::Stage(cycles))
    }

    /// Changes of every aged stage relative to the fresh one. Film growth is
    /// read off the film-resistance increase with the given film
    /// conductivities (S/m) and reported in nm.
    pub fn aging_history(sigma_f0_pos: f64, sigma_f0_neg: f64) -> Vec<AgingObservation> {
        let t = Self::table();
        let fresh = t[0];
        t[1..]
            .iter()
            .map(|s| AgingObservation {
                d_eps_s_pos: s.eps_s_pos - fresh.eps_s_pos,
                d_eps_s_neg: s.eps_s_neg - fresh.eps_s_neg,
                d_eps_e_neg: s.eps_e_neg - fresh.eps_e_neg,
                film_pos: (s.film_resistance_pos - fresh.film_resistance_pos) * sigma_f0_pos * 1e9,
                film_neg: (s.film_resistance_neg - fresh.film_resistance_neg) * sigma_f0_neg * 1e9,
            })
            .collect()
    }

    /// `base` with this stage's composition written in.
    pub fn params(&self, base: &CellParameters) -> CellParameters {
        let mut p = base.clone();
        p.composition.eps_s_neg = self.eps_s_neg;
        p.composition.eps_s_pos = self.eps_s_pos;
        p.composition.eps_e_neg = self.eps_e_neg;
        p.set_film_resistance(self.film_resistance_neg, self.film_resistance_pos);
        p.inventory = StoichPair {
            neg: self.stoich_neg,
            pos: self.stoich_pos,
        };
        p
    }
}
