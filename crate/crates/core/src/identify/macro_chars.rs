use serde::{Deserialize, Serialize};

use super::{IdentifyError, StaticTargets};
use crate::model::{CellParameters, StoichPair, FARADAY};

/// Points on the derived SOC-OCV curve.
pub const OCV_POINTS: usize = 201;

const BISECTION_TOL: f64 = 1e-12;

/// Stoichiometry window of both electrodes between the voltage limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoichLimits {
    pub stoich_neg_min: f64,
    pub stoich_neg_max: f64,
    pub stoich_pos_min: f64,
    pub stoich_pos_max: f64,
    /// Positive-to-negative active volume ratio.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroCharacteristics {
    pub capacity_mah: f64,
    pub soc: Vec<f64>,
    pub ocv: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
}

impl MacroCharacteristics {
    /// Linear interpolation of the tabulated curve; `soc` is clamped to [0, 1].
    pub fn ocv_at(&self, soc: f64) -> f64 {
        let s = soc.clamp(0.0, 1.0);
        let n = self.soc.len() - 1;
        let pos = s * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let t = pos - k as f64;
        self.ocv[k] + t * (self.ocv[k + 1] - self.ocv[k])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("soc,ocv_V\n");
        for (a, b) in self.soc.iter().zip(&self.ocv) {
            s.push_str(&format!("{a},{b:.9}\n"));
        }
        s
    }
}

/// Positive stoichiometry that conserves lithium with the start pair when
/// the negative electrode sits at `x_neg`.
fn conserved_pos(start: StoichPair, x_neg: f64, params: &CellParameters, gamma: f64) -> f64 {
    let m = &params.material;
    start.pos + (start.neg - x_neg) * m.cs_max_neg / (gamma * m.cs_max_pos)
}

/// Solves the conservation and voltage equations for both ends of the
/// voltage window, using the identified start state and porosities.
///
/// Each end reduces to one unknown along the conservation line, on which
/// the open-circuit voltage rises with the negative stoichiometry.
pub fn solve_stoich_limits(
    id: &StaticTargets,
    params: &CellParameters,
    v_min: f64,
    v_max: f64,
) -> Result<StoichLimits, IdentifyError> {
    if !(v_min < v_max) {
        return Err(IdentifyError::Domain(format!("voltage window [{v_min}, {v_max}]")));
    }
    let mut p = params.clone();
    id.apply(&mut p);
    let gamma = p.volume_ratio();
    let start = id.start();
    let ratio = p.material.cs_max_neg / (gamma * p.material.cs_max_pos);
    // Keep both stoichiometries inside [0, 1].
    let lo = (start.neg - (1.0 - start.pos) / ratio).max(0.0);
    let hi = (start.neg + start.pos / ratio).min(1.0);
    if !(lo < hi) {
        return Err(IdentifyError::NoSolution("empty conservation line".into()));
    }
    let ocv = |x: f64| -> f64 {
        let xp = conserved_pos(start, x, &p, gamma).clamp(0.0, 1.0);
        p.material.ocp_pos.eval_in_domain(xp) - p.material.ocp_neg.eval_in_domain(x)
    };
    let solve = |target: f64| -> Result<f64, IdentifyError> {
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (ocv(a) - target, ocv(b) - target);
        if fa > 0.0 || fb < 0.0 {
            return Err(IdentifyError::NoSolution(format!(
                "{target} V outside the reachable range [{:.4}, {:.4}] V",
                fa + target,
                fb + target
            )));
        }
        while b - a > BISECTION_TOL {
            let m = 0.5 * (a + b);
            if ocv(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let neg_min = solve(v_min)?;
    let neg_max = solve(v_max)?;
    Ok(StoichLimits {
        stoich_neg_min: neg_min,
        stoich_neg_max: neg_max,
        stoich_pos_min: conserved_pos(start, neg_max, &p, gamma),
        stoich_pos_max: conserved_pos(start, neg_min, &p, gamma),
        gamma,
    })
}

/// Capacity in mAh and the SOC-OCV curve implied by the stoichiometry
/// window. SOC runs linearly with the negative stoichiometry.
pub fn derive_macro(
    limits: &StoichLimits,
    id: &StaticTargets,
    params: &CellParameters,
    v_min: f64,
    v_max: f64,
) -> MacroCharacteristics {
    let mut p = params.clone();
    id.apply(&mut p);
    let coulombs = (limits.stoich_neg_max - limits.stoich_neg_min) * p.capacity_moles_neg() * FARADAY;
    let mut soc = Vec::with_capacity(OCV_POINTS);
    let mut ocv = Vec::with_capacity(OCV_POINTS);
    for i in 0..OCV_POINTS {
        let s = i as f64 / (OCV_POINTS - 1) as f64;
        let xp = limits.stoich_pos_max - s * (limits.stoich_pos_max - limits.stoich_pos_min);
        let xn = limits.stoich_neg_min + s * (limits.stoich_neg_max - limits.stoich_neg_min);
        soc.push(s);
        ocv.push(
            p.material.ocp_pos.eval_in_domain(xp.clamp(0.0, 1.0))
                - p.material.ocp_neg.eval_in_domain(xn.clamp(0.0, 1.0)),
        );
    }
    MacroCharacteristics {
        capacity_mah: coulombs / 3.6,
        soc,
        ocv,
        v_min,
        v_max,
    }
}

/// SOC of a negative stoichiometry within the window.
pub fn soc_of_stoich(limits: &StoichLimits, stoich_neg: f64) -> f64 {
    (stoich_neg - limits.stoich_neg_min) / (limits.stoich_neg_max - limits.stoich_neg_min)
}
