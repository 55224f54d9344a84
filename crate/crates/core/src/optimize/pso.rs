use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{stalled, BoundedProblem, IterationRecord, OptimizeError, SolveOutcome, SolverConfig, StopReason};

/// Global-best particle swarm with inertia weight.
///
/// Particles leaving the box are put back on the violated bound and lose
/// their velocity component in that dimension. Random numbers are drawn on
/// one thread in a fixed order, so results depend only on the seed.
pub fn pso_minimize<F: Fn(&[f64]) -> f64 + Sync>(
    problem: &BoundedProblem<F>,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, OptimizeError> {
    cfg.validate()?;
    let n = cfg.population;
    let d = problem.dim();
    let budget = cfg.budget(d);
    if budget < n {
        return Err(OptimizeError::Config(format!(
            "evaluation budget {budget} below swarm size {n}"
        )));
    }
    let s = &cfg.pso;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let range: Vec<f64> = (0..d).map(|k| problem.upper[k] - problem.lower[k]).collect();
    let vmax: Vec<f64> = range.iter().map(|r| s.max_velocity * r).collect();

    let mut x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|k| problem.lower[k] + rng.random::<f64>() * range[k]).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|k| (2.0 * rng.random::<f64>() - 1.0) * vmax[k]).collect())
        .collect();
    let mut f = problem.eval_all(&x)?;
    let mut evaluations = n;
    let mut pbest = x.clone();
    let mut pbest_f = f.clone();
    let mut g = argmin(&pbest_f);
    let mut history = vec![IterationRecord {
        iteration: 0,
        evaluations,
        best_value: pbest_f[g],
    }];
    let mut reason = StopReason::Budget;
    let mut iterations = 0;
    for it in 1..=cfg.max_iterations {
        if evaluations + n > budget {
            break;
        }
        let gbest = pbest[g].clone();
        for i in 0..n {
            for k in 0..d {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let mut vel = s.inertia * v[i][k]
                    + s.cognitive * r1 * (pbest[i][k] - x[i][k])
                    + s.social * r2 * (gbest[k] - x[i][k]);
                vel = vel.clamp(-vmax[k], vmax[k]);
                let mut pos = x[i][k] + vel;
                if pos < problem.lower[k] {
                    pos = problem.lower[k];
                    vel = 0.0;
                } else if pos > problem.upper[k] {
                    pos = problem.upper[k];
                    vel = 0.0;
                }
                x[i][k] = pos;
                v[i][k] = vel;
            }
        }
        f = problem.eval_all(&x)?;
        evaluations += n;
        for i in 0..n {
            if f[i] < pbest_f[i] {
                pbest_f[i] = f[i];
                pbest[i].clone_from(&x[i]);
            }
        }
        g = argmin(&pbest_f);
        iterations = it;
        history.push(IterationRecord {
            iteration: it,
            evaluations,
            best_value: pbest_f[g],
        });
        if stalled(&history, cfg.patience, cfg.tolerance) {
            reason = StopReason::Tolerance;
            break;
        }
    }
    Ok(SolveOutcome {
        best_point: pbest[g].clone(),
        best_value: pbest_f[g],
        evaluations,
        iterations,
        reason,
        history,
    })
}

pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}
