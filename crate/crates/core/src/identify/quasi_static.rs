use serde::{Deserialize, Serialize};

use super::IdentifyError;
use crate::model::{static_model::static_voltages_into, CellParameters, StoichPair, VoltageTrace};
use crate::optimize::{minimize, BoundedProblem, SolverConfig};
use crate::profiles::CurrentProfile;

/// Objective returned when the static model cannot run a candidate.
const FAILED_OBJECTIVE: f64 = 1e6;

/// The four composition quantities fitted from a quasi-static test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticTargets {
    pub stoich_neg_t0: f64,
    pub stoich_pos_t0: f64,
    pub eps_s_neg: f64,
    pub eps_s_pos: f64,
}

impl StaticTargets {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.stoich_neg_t0, self.stoich_pos_t0, self.eps_s_neg, self.eps_s_pos]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        StaticTargets {
            stoich_neg_t0: x[0],
            stoich_pos_t0: x[1],
            eps_s_neg: x[2],
            eps_s_pos: x[3],
        }
    }

    pub fn start(&self) -> StoichPair {
        StoichPair {
            neg: self.stoich_neg_t0,
            pos: self.stoich_pos_t0,
        }
    }

    /// Copies the porosities into `params`.
    pub fn apply(&self, params: &mut CellParameters) {
        params.composition.eps_s_neg = self.eps_s_neg;
        params.composition.eps_s_pos = self.eps_s_pos;
    }

    pub const NAMES: [&'static str; 4] = ["stoich_neg_t0", "stoich_pos_t0", "eps_s_neg", "eps_s_pos"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StaticIdConfig {
    pub solver: SolverConfig,
    /// Search box is `[1 - f, 1 + f]` times the nominal values.
    pub bound_fraction: f64,
    /// Mean squared residual per sample above which the fit is flagged, V².
    pub poor_fit_threshold: f64,
    /// Factor applied to the V² objective before it reaches the solver, so
    /// that the solver tolerance is read in these units (1e6: mV²).
    pub objective_scale: f64,
    /// Independent global searches; the best one is kept.
    pub restarts: usize,
    /// Refine the best global result with the simplex.
    pub polish: bool,
}

impl Default for StaticIdConfig {
    fn default() -> Self {
        StaticIdConfig {
            solver: SolverConfig {
                max_iterations: 1000,
                ..SolverConfig::pso()
            },
            bound_fraction: 0.2,
            poor_fit_threshold: 1e-4,
            objective_scale: 1e6,
            restarts: 4,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticIdentified {
    pub stoich_neg_t0: f64,
    pub stoich_pos_t0: f64,
    pub eps_s_neg: f64,
    pub eps_s_pos: f64,
    /// Sum of squared voltage residuals, V².
    pub residual: f64,
    pub rmse: f64,
    pub poor_fit: bool,
    pub evaluations: usize,
    pub iterations: usize,
}

impl StaticIdentified {
    pub fn targets(&self) -> StaticTargets {
        StaticTargets {
            stoich_neg_t0: self.stoich_neg_t0,
            stoich_pos_t0: self.stoich_pos_t0,
            eps_s_neg: self.eps_s_neg,
            eps_s_pos: self.eps_s_pos,
        }
    }
}

/// Sum of squared residuals of the static model against `measured`.
pub fn static_residual(
    measured: &[f64],
    profile: &CurrentProfile,
    knowns: &CellParameters,
    x: &StaticTargets,
) -> Result<f64, IdentifyError> {
    let mut params = knowns.clone();
    x.apply(&mut params);
    let mut v = Vec::with_capacity(profile.len());
    static_voltages_into(x.stoich_neg_t0, x.stoich_pos_t0, &profile.samples, profile.dt, &params, &mut v)?;
    Ok(measured.iter().zip(&v).map(|(m, p)| (m - p) * (m - p)).sum())
}

/// Fits the initial stoichiometries and active-material fractions to a
/// low-rate discharge with the static model.
pub fn identify_quasi_static(
    measured: &VoltageTrace,
    profile: &CurrentProfile,
    knowns: &CellParameters,
    nominal: &StaticTargets,
    cfg: &StaticIdConfig,
) -> Result<StaticIdentified, IdentifyError> {
    if measured.len() != profile.len() {
        return Err(IdentifyError::Alignment(format!(
            "trace has {} samples, profile {}",
            measured.len(),
            profile.len()
        )));
    }
    if !(cfg.bound_fraction > 0.0 && cfg.bound_fraction < 1.0) {
        return Err(IdentifyError::Domain(format!(
            "bound fraction {} outside (0, 1)",
            cfg.bound_fraction
        )));
    }
    let centre = nominal.to_vec();
    let lower: Vec<f64> = centre.iter().map(|c| c * (1.0 - cfg.bound_fraction)).collect();
    // Stoichiometries and fractions cannot reach 1.
    let upper: Vec<f64> = centre
        .iter()
        .map(|c| (c * (1.0 + cfg.bound_fraction)).min(1.0 - 1e-9))
        .collect();
    let scale = cfg.objective_scale;
    let objective = |x: &[f64]| -> f64 {
        match static_residual(&measured.voltage, profile, knowns, &StaticTargets::from_slice(x)) {
            Ok(r) => r * scale,
            Err(_) => FAILED_OBJECTIVE * scale,
        }
    };
    let problem = BoundedProblem::new(lower, upper, objective)?;
    let mut best_point = centre.clone();
    let mut best_value = f64::INFINITY;
    let mut evaluations = 0;
    let mut iterations = 0;
    for r in 0..cfg.restarts.max(1) {
        let solver = cfg.solver.clone().with_seed(cfg.solver.seed.wrapping_add(r as u64));
        let out = minimize(&problem, &solver, Some(&centre))?;
        evaluations += out.evaluations;
        iterations += out.iterations;
        if out.best_value < best_value {
            best_value = out.best_value;
            best_point = out.best_point;
        }
    }
    if cfg.polish {
        let local = SolverConfig {
            tolerance: 0.0,
            ..SolverConfig::local()
        };
        let out = minimize(&problem, &local, Some(&best_point))?;
        evaluations += out.evaluations;
        iterations += out.iterations;
        if out.best_value < best_value {
            best_value = out.best_value;
            best_point = out.best_point;
        }
    }
    let best = StaticTargets::from_slice(&best_point);
    let residual = best_value / scale;
    let per_sample = residual / measured.len() as f64;
    Ok(StaticIdentified {
        stoich_neg_t0: best.stoich_neg_t0,
        stoich_pos_t0: best.stoich_pos_t0,
        eps_s_neg: best.eps_s_neg,
        eps_s_pos: best.eps_s_pos,
        residual,
        rmse: per_sample.sqrt(),
        poor_fit: per_sample > cfg.poor_fit_threshold,
        evaluations,
        iterations,
    })
}
