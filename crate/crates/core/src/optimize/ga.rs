use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::pso::argmin;
use super::{stalled, BoundedProblem, IterationRecord, OptimizeError, SolveOutcome, SolverConfig, StopReason};

/// Real-coded genetic algorithm: tournament selection, blend crossover,
/// clipped Gaussian mutation and elitism.
pub fn ga_minimize<F: Fn(&[f64]) -> f64 + Sync>(
    problem: &BoundedProblem<F>,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, OptimizeError> {
    cfg.validate()?;
    let n = cfg.population;
    let d = problem.dim();
    let s = &cfg.ga;
    let budget = cfg.budget(d);
    if budget < n {
        return Err(OptimizeError::Config(format!(
            "evaluation budget {budget} below population {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let range: Vec<f64> = (0..d).map(|k| problem.upper[k] - problem.lower[k]).collect();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let mut pop: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|k| problem.lower[k] + rng.random::<f64>() * range[k]).collect())
        .collect();
    let mut fit = problem.eval_all(&pop)?;
    let mut evaluations = n;
    let mut history = vec![IterationRecord {
        iteration: 0,
        evaluations,
        best_value: fit[argmin(&fit)],
    }];
    let mut reason = StopReason::Budget;
    let mut iterations = 0;
    let children_per_gen = n - s.elitism;
    for gen in 1..=cfg.max_iterations {
        if evaluations + children_per_gen > budget {
            break;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));
        let mut next: Vec<Vec<f64>> = order[..s.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..s.elitism].iter().map(|&i| fit[i]).collect();
        let mut children = Vec::with_capacity(children_per_gen);
        for _ in 0..children_per_gen {
            let a = tournament(&fit, s.tournament, &mut rng);
            let b = tournament(&fit, s.tournament, &mut rng);
            let mut child = pop[a].clone();
            if rng.random::<f64>() < s.crossover_rate {
                for k in 0..d {
                    let beta = -s.blend_alpha + (1.0 + 2.0 * s.blend_alpha) * rng.random::<f64>();
                    child[k] = pop[a][k] + beta * (pop[b][k] - pop[a][k]);
                }
            }
            for k in 0..d {
                if rng.random::<f64>() < s.mutation_rate {
                    child[k] += s.mutation_scale * range[k] * unit.sample(&mut rng);
                }
            }
            problem.clamp(&mut child);
            children.push(child);
        }
        let child_fit = problem.eval_all(&children)?;
        evaluations += children.len();
        next.extend(children);
        next_fit.extend(child_fit);
        pop = next;
        fit = next_fit;
        iterations = gen;
        history.push(IterationRecord {
            iteration: gen,
            evaluations,
            best_value: fit[argmin(&fit)],
        });
        if stalled(&history, cfg.patience, cfg.tolerance) {
            reason = StopReason::Tolerance;
            break;
        }
    }
    let best = argmin(&fit);
    Ok(SolveOutcome {
        best_point: pop[best].clone(),
        best_value: fit[best],
        evaluations,
        iterations,
        reason,
        history,
    })
}

fn tournament(fit: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] < fit[best] {
            best = c;
        }
    }
    best
}
