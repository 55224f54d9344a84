use serde::{Deserialize, Serialize};

use super::IdentifyError;
use crate::model::VoltageTrace;
use crate::profiles::{CutPoints, Regime};

/// Which samples enter an objective and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Every sample.
    #[serde(rename = "static")]
    Static,
    /// The two instantaneous windows, absolute voltages.
    #[serde(rename = "I")]
    Instantaneous,
    /// The excitation segment, voltages relative to its first sample.
    #[serde(rename = "E")]
    Excitation,
    /// The rest segment, voltages relative to its first sample.
    #[serde(rename = "R")]
    Rest,
}

impl ObjectiveMode {
    pub fn for_regime(r: Regime) -> Self {
        match r {
            Regime::Instantaneous => ObjectiveMode::Instantaneous,
            Regime::Excitation => ObjectiveMode::Excitation,
            Regime::Rest => ObjectiveMode::Rest,
        }
    }
}

/// Sum of squared voltage errors for one mode.
///
/// `predicted` may be shorter than `measured` as long as it covers every
/// sample the mode needs.
pub fn segment_sse(measured: &[f64], predicted: &[f64], cuts: &CutPoints, mode: ObjectiveMode) -> f64 {
    let sq = |a: f64, b: f64| (a - b) * (a - b);
    match mode {
        ObjectiveMode::Static => measured.iter().zip(predicted).map(|(m, p)| sq(*m, *p)).sum(),
        ObjectiveMode::Instantaneous => {
            let a: f64 = (0..=cuts.n1).map(|i| sq(measured[i], predicted[i])).sum();
            let b: f64 = (cuts.n2..=cuts.n3).map(|i| sq(measured[i], predicted[i])).sum();
            a + b
        }
        ObjectiveMode::Excitation | ObjectiveMode::Rest => {
            let (lo, hi) = if mode == ObjectiveMode::Excitation {
                (cuts.n1, cuts.n2)
            } else {
                (cuts.n3, cuts.n)
            };
            let (m0, p0) = (measured[lo], predicted[lo]);
            (lo..=hi)
                .map(|i| sq(predicted[i] - p0, measured[i] - m0))
                .sum()
        }
    }
}

/// Objective between two aligned traces; segment modes need the cut points.
pub fn objective_value(
    measured: &VoltageTrace,
    predicted: &VoltageTrace,
    cuts: Option<&CutPoints>,
    mode: ObjectiveMode,
) -> Result<f64, IdentifyError> {
    if measured.len() != predicted.len() {
        return Err(IdentifyError::Alignment(format!(
            "measured has {} samples, predicted {}",
            measured.len(),
            predicted.len()
        )));
    }
    if let Some(k) = measured
        .time
        .iter()
        .zip(&predicted.time)
        .position(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(IdentifyError::Alignment(format!("time stamps differ at sample {k}")));
    }
    let default_cuts;
    let cuts = match (mode, cuts) {
        (_, Some(c)) => c,
        (ObjectiveMode::Static, None) => {
            default_cuts = CutPoints {
                n1: 0,
                n2: 0,
                n3: 0,
                n: measured.len().saturating_sub(1),
            };
            &default_cuts
        }
        (_, None) => {
            return Err(IdentifyError::Alignment(format!(
                "mode {mode:?} needs segment cut points"
            )))
        }
    };
    if mode != ObjectiveMode::Static && cuts.n >= measured.len() {
        return Err(IdentifyError::Alignment(format!(
            "cut point {} beyond trace of {} samples",
            cuts.n,
            measured.len()
        )));
    }
    Ok(segment_sse(&measured.voltage, &predicted.voltage, cuts, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(v: Vec<f64>) -> VoltageTrace {
        VoltageTrace {
            time: (1..=v.len()).map(|k| k as f64 * 0.1).collect(),
            current: vec![0.0; v.len()],
            voltage: v,
        }
    }

    fn cuts() -> CutPoints {
        CutPoints { n1: 3, n2: 8, n3: 10, n: 19 }
    }

    #[test]
    fn identical_traces_give_zero() {
        let t = trace((0..20).map(|k| 3.7 + 0.01 * (k as f64).sin()).collect());
        for mode in [ObjectiveMode::Static, ObjectiveMode::Instantaneous, ObjectiveMode::Excitation, ObjectiveMode::Rest] {
            assert_eq!(objective_value(&t, &t, Some(&cuts()), mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_offset() {
        let m = trace((0..20).map(|k| 3.6 + 0.003 * k as f64).collect());
        let c = 0.002;
        let p = trace(m.voltage.iter().map(|v| v + c).collect());
        let cu = cuts();
        assert!(objective_value(&m, &p, Some(&cu), ObjectiveMode::Excitation).unwrap().abs() < 1e-24);
        assert!(objective_value(&m, &p, Some(&cu), ObjectiveMode::Rest).unwrap().abs() < 1e-24);
        let n = (cu.n1 + 1 + cu.n3 - cu.n2 + 1) as f64;
        let fi = objective_value(&m, &p, Some(&cu), ObjectiveMode::Instantaneous).unwrap();
        assert!((fi - n * c * c).abs() < 1e-15);
        let fs = objective_value(&m, &p, None, ObjectiveMode::Static).unwrap();
        assert!((fs - 20.0 * c * c).abs() < 1e-15);
    }

    #[test]
    fn misaligned_traces_are_rejected() {
        let a = trace(vec![3.7; 20]);
        let b = trace(vec![3.7; 19]);
        assert!(matches!(
            objective_value(&a, &b, Some(&cuts()), ObjectiveMode::Static),
            Err(IdentifyError::Alignment(_))
        ));
    }
}
