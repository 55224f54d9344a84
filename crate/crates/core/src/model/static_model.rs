use super::{CellParameters, Electrode, ModelError, FARADAY};

/// Advances the quasi-static model by one step of constant `current`
/// (A, discharge positive) lasting `dt` seconds.
///
/// Returns the new negative and positive stoichiometries and the terminal
/// voltage, which in this model is the open-circuit voltage of the new state.
pub fn static_step(
    stoich_neg: f64,
    stoich_pos: f64,
    current: f64,
    dt: f64,
    params: &CellParameters,
) -> Result<(f64, f64, f64), ModelError> {
    let q = current * dt / FARADAY;
    let neg = stoich_neg - q / params.capacity_moles_neg();
    let pos = stoich_pos + q / params.capacity_moles_pos();
    check_range(neg, pos)?;
    let m = &params.material;
    let v = m.ocp_pos.eval_in_domain(pos) - m.ocp_neg.eval_in_domain(neg);
    Ok((neg, pos, v))
}

fn check_range(neg: f64, pos: f64) -> Result<(), ModelError> {
    if !(neg > 0.0 && neg < 1.0) {
        return Err(ModelError::Depletion {
            electrode: Electrode::Negative,
            stoich: neg,
        });
    }
    if !(pos > 0.0 && pos < 1.0) {
        return Err(ModelError::Depletion {
            electrode: Electrode::Positive,
            stoich: pos,
        });
    }
    Ok(())
}

/// Voltage after each sample of a constant-interval current sequence.
///
/// Equivalent to chaining `static_step`, but accumulates charge from the
/// start so long sequences do not drift.
pub fn static_voltages(
    start_neg: f64,
    start_pos: f64,
    currents: &[f64],
    dt: f64,
    params: &CellParameters,
) -> Result<Vec<f64>, ModelError> {
    let mut out = Vec::with_capacity(currents.len());
    static_voltages_into(start_neg, start_pos, currents, dt, params, &mut out)?;
    Ok(out)
}

pub(crate) fn static_voltages_into(
    start_neg: f64,
    start_pos: f64,
    currents: &[f64],
    dt: f64,
    params: &CellParameters,
    out: &mut Vec<f64>,
) -> Result<(), ModelError> {
    out.clear();
    let kn = dt / (FARADAY * params.capacity_moles_neg());
    let kp = dt / (FARADAY * params.capacity_moles_pos());
    let m = &params.material;
    let mut charge = 0.0;
    for &i in currents {
        charge += i;
        let neg = start_neg - charge * kn;
        let pos = start_pos + charge * kp;
        check_range(neg, pos)?;
        out.push(m.ocp_pos.eval_in_domain(pos) - m.ocp_neg.eval_in_domain(neg));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_current_keeps_state() {
        let p = CellParameters::default();
        let (n, q, v) = static_step(0.5, 0.5, 0.0, 100.0, &p).unwrap();
        assert_eq!((n, q), (0.5, 0.5));
        let ocv = p.ocv(crate::model::StoichPair { neg: 0.5, pos: 0.5 }).unwrap();
        assert_eq!(v, ocv);
    }

    #[test]
    fn discharge_moves_stoichiometries_apart() {
        let p = CellParameters::default();
        let (n, q, _) = static_step(0.5, 0.5, 1.0, 10.0, &p).unwrap();
        assert!(n < 0.5 && q > 0.5);
        // Lithium leaving the negative equals lithium entering the positive.
        let dn = (0.5 - n) * p.capacity_moles_neg();
        let dp = (q - 0.5) * p.capacity_moles_pos();
        assert!((dn - dp).abs() < 1e-12 * dn);
        assert!((dn - 10.0 / FARADAY).abs() < 1e-12 * dn);
    }

    #[test]
    fn depletion_names_electrode() {
        let p = CellParameters::default();
        let big = 1e5;
        let err = static_step(0.01, 0.5, big, 1.0, &p).unwrap_err();
        assert!(matches!(err, ModelError::Depletion { electrode: Electrode::Negative, .. }));
        let err = static_step(0.5, 0.999, 116.0, 1.0, &p).unwrap_err();
        assert!(matches!(err, ModelError::Depletion { electrode: Electrode::Positive, .. }));
    }

    #[test]
    fn chained_steps_match_accumulated() {
        let p = CellParameters::default();
        let currents = [0.5, 0.2, -0.1, 0.3];
        let v = static_voltages(0.6, 0.4, &currents, 20.0, &p).unwrap();
        let (mut n, mut q) = (0.6, 0.4);
        for (k, &i) in currents.iter().enumerate() {
            let (a, b, vv) = static_step(n, q, i, 20.0, &p).unwrap();
            n = a;
            q = b;
            assert!((vv - v[k]).abs() < 1e-12);
        }
    }
}
