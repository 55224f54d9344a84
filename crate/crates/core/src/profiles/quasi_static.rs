use serde::{Deserialize, Serialize};

use super::{CurrentProfile, ProfileError};
use crate::model::{CellParameters, ModelError, StoichPair};

/// Low-rate discharge used to identify the composition parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuasiStaticConfig {
    pub c_rate: f64,
    pub nominal_capacity_mah: f64,
    /// s
    pub sample_interval: f64,
    pub samples: usize,
    /// Open-circuit voltage at which the test starts, V.
    pub start_ocv: f64,
}

impl Default for QuasiStaticConfig {
    fn default() -> Self {
        QuasiStaticConfig {
            c_rate: 0.01,
            nominal_capacity_mah: 2200.0,
            sample_interval: 200.0,
            samples: 100,
            start_ocv: 3.8,
        }
    }
}

impl QuasiStaticConfig {
    /// Discharge current, A.
    pub fn current(&self) -> f64 {
        self.c_rate * self.nominal_capacity_mah * 1e-3
    }
}

/// Builds the quasi-static profile and the rest state it starts from.
pub fn gen_quasi_static(
    params: &CellParameters,
    cfg: &QuasiStaticConfig,
) -> Result<(CurrentProfile, StoichPair), ProfileError> {
    if !(cfg.nominal_capacity_mah > 0.0 && cfg.c_rate > 0.0) || cfg.samples == 0 {
        return Err(ProfileError::Config(
            "capacity, C-rate and sample count must be positive".into(),
        ));
    }
    let start = find_stoich_for_ocv(params, cfg.start_ocv).map_err(|e| match e {
        ModelError::OcvOutOfRange { .. } => ProfileError::Config(e.to_string()),
        other => ProfileError::Model(other),
    })?;
    let profile = CurrentProfile::new(
        cfg.sample_interval,
        vec![cfg.current(); cfg.samples],
        "quasi-static",
    )?;
    Ok((profile, start))
}

/// Range of negative stoichiometries for which the lithium-inventory line
/// stays inside both OCP domains.
pub(crate) fn inventory_line_range(params: &CellParameters) -> (f64, f64) {
    let ratio = params.capacity_moles_neg() / params.capacity_moles_pos();
    let inv = params.inventory;
    // pos(x) = inv.pos + (inv.neg - x) * ratio, decreasing in x.
    let x_at_pos_one = inv.neg - (1.0 - inv.pos) / ratio;
    let x_at_pos_zero = inv.neg + inv.pos / ratio;
    (x_at_pos_one.max(0.0), x_at_pos_zero.min(1.0))
}

/// Stoichiometry pair on the lithium-inventory line whose open-circuit
/// voltage equals `target_ocv`, found by bisection.
pub fn find_stoich_for_ocv(params: &CellParameters, target_ocv: f64) -> Result<StoichPair, ModelError> {
    let (mut lo, mut hi) = inventory_line_range(params);
    let ocv_at = |x: f64| -> f64 {
        let pos = params.pos_on_inventory_line(x).clamp(0.0, 1.0);
        params.material.ocp_pos.eval_in_domain(pos) - params.material.ocp_neg.eval_in_domain(x)
    };
    let (v_lo, v_hi) = (ocv_at(lo), ocv_at(hi));
    if !(target_ocv >= v_lo && target_ocv <= v_hi) {
        return Err(ModelError::OcvOutOfRange {
            target: target_ocv,
            low: v_lo,
            high: v_hi,
        });
    }
    // OCV increases with the negative stoichiometry along the line.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ocv_at(mid) < target_ocv {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if (ocv_at(lo) - target_ocv).abs() <= (ocv_at(hi) - target_ocv).abs() {
        lo
    } else {
        hi
    };
    Ok(StoichPair {
        neg: x,
        pos: params.pos_on_inventory_line(x).clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_shape() {
        let p = CellParameters::default();
        let (prof, start) = gen_quasi_static(&p, &QuasiStaticConfig::default()).unwrap();
        assert_eq!(prof.len(), 100);
        assert_eq!(prof.dt, 200.0);
        assert!((prof.samples[0] - 0.022).abs() < 1e-15);
        assert!((prof.duration() - 20000.0).abs() < 1e-9);
        assert!((p.ocv(start).unwrap() - 3.8).abs() < 1e-6);
    }

    #[test]
    fn unreachable_start_is_config_error() {
        let p = CellParameters::default();
        let cfg = QuasiStaticConfig {
            start_ocv: 6.0,
            ..Default::default()
        };
        assert!(matches!(gen_quasi_static(&p, &cfg), Err(ProfileError::Config(_))));
    }

    #[test]
    fn bisection_agrees_with_grid_scan() {
        let p = CellParameters::default();
        let target = 3.8;
        let got = find_stoich_for_ocv(&p, target).unwrap();
        let (lo, hi) = inventory_line_range(&p);
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=10_000 {
            let x = lo + (hi - lo) * k as f64 / 10_000.0;
            let pos = p.pos_on_inventory_line(x).clamp(0.0, 1.0);
            let v = p.ocv(StoichPair { neg: x, pos }).unwrap();
            if (v - target).abs() < best.0 {
                best = ((v - target).abs(), x);
            }
        }
        assert!((got.neg - best.1).abs() <= (hi - lo) / 10_000.0);
    }
}
