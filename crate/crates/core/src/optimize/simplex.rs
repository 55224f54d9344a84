use super::{BoundedProblem, IterationRecord, OptimizeError, SolveOutcome, SolverConfig, StopReason};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Nelder-Mead simplex with trial points projected onto the box.
///
/// Stops when the vertex values span less than `tolerance` (relative to
/// the best value once that exceeds 1) and the simplex is smaller than
/// `local.x_tolerance` of the bound range in every dimension, when the
/// simplex has collapsed to a thousandth of that size, or when the budget
/// runs out.
pub fn local_minimize<F: Fn(&[f64]) -> f64 + Sync>(
    problem: &BoundedProblem<F>,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome, OptimizeError> {
    cfg.validate()?;
    if !problem.contains(start) {
        return Err(OptimizeError::StartOutside {
            point: start.to_vec(),
        });
    }
    let d = problem.dim();
    let budget = cfg.budget(d);
    let range: Vec<f64> = (0..d)
        .map(|k| (problem.upper[k] - problem.lower[k]).max(f64::MIN_POSITIVE))
        .collect();

    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for k in 0..d {
        let mut p = start.to_vec();
        let step = cfg.local.initial_step * range[k];
        p[k] = if p[k] + step <= problem.upper[k] { p[k] + step } else { p[k] - step };
        problem.clamp(&mut p);
        simplex.push(p);
    }
    let mut values = Vec::with_capacity(d + 1);
    for p in &simplex {
        values.push(problem.eval(p)?);
    }
    let mut evaluations = d + 1;
    let mut history = Vec::new();
    let mut reason = StopReason::Budget;
    let mut iterations = 0;

    let trial = |centroid: &[f64], worst: &[f64], coef: f64| -> Vec<f64> {
        let mut p: Vec<f64> = centroid.iter().zip(worst).map(|(c, w)| c + coef * (c - w)).collect();
        problem.clamp(&mut p);
        p
    };

    for it in 0..=cfg.max_iterations {
        sort_simplex(&mut simplex, &mut values);
        history.push(IterationRecord {
            iteration: it,
            evaluations,
            best_value: values[0],
        });
        let spread = values[d] - values[0];
        let size = (0..d)
            .map(|k| {
                simplex[1..]
                    .iter()
                    .map(|p| (p[k] - simplex[0][k]).abs() / range[k])
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let converged = spread <= cfg.tolerance * values[0].abs().max(1.0) && size <= cfg.local.x_tolerance;
        if converged || size <= 1e-3 * cfg.local.x_tolerance {
            reason = StopReason::Tolerance;
            break;
        }
        if it == cfg.max_iterations || evaluations + d + 2 > budget {
            break;
        }
        iterations = it + 1;
        let mut centroid = vec![0.0; d];
        for p in &simplex[..d] {
            for k in 0..d {
                centroid[k] += p[k] / d as f64;
            }
        }
        let xr = trial(&centroid, &simplex[d], REFLECT);
        let fr = problem.eval(&xr)?;
        evaluations += 1;
        if fr < values[0] {
            let xe = trial(&centroid, &simplex[d], EXPAND);
            let fe = problem.eval(&xe)?;
            evaluations += 1;
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let xc = trial(&centroid, &simplex[d], REFLECT * CONTRACT);
            let fc = problem.eval(&xc)?;
            (xc, fc)
        } else {
            let xc = trial(&centroid, &simplex[d], -CONTRACT);
            let fc = problem.eval(&xc)?;
            (xc, fc)
        };
        evaluations += 1;
        if fc < values[d].min(fr) {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=d {
            for k in 0..d {
                simplex[i][k] = best[k] + SHRINK * (simplex[i][k] - best[k]);
            }
            values[i] = problem.eval(&simplex[i])?;
        }
        evaluations += d;
    }
    sort_simplex(&mut simplex, &mut values);
    Ok(SolveOutcome {
        best_point: simplex[0].clone(),
        best_value: values[0],
        evaluations,
        iterations,
        reason,
        history,
    })
}

fn sort_simplex(simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
    *values = idx.iter().map(|&i| values[i]).collect();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_outside_bounds_is_rejected() {
        let p = BoundedProblem::new(vec![0.0], vec![1.0], |x: &[f64]| x[0]).unwrap();
        let r = local_minimize(&p, &[2.0], &SolverConfig::local());
        assert!(matches!(r, Err(OptimizeError::StartOutside { .. })));
    }

    #[test]
    fn active_bound_is_found() {
        let p = BoundedProblem::new(vec![0.0, 0.0], vec![1.0, 1.0], |x: &[f64]| {
            (x[0] + 1.0).powi(2) + (x[1] - 0.3).powi(2)
        })
        .unwrap();
        let out = local_minimize(&p, &[0.5, 0.5], &SolverConfig::local()).unwrap();
        assert!(out.best_point[0].abs() < 1e-6, "{:?}", out.best_point);
        assert!((out.best_point[1] - 0.3).abs() < 1e-5, "{:?}", out.best_point);
    }
}
