//! Bounded derivative-free minimizers: particle swarm, genetic algorithm
//! and a Nelder-Mead simplex for local refinement.

mod ga;
mod pso;
mod simplex;

pub use ga::ga_minimize;
pub use pso::pso_minimize;
pub use simplex::local_minimize;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("objective returned {value} at {point:?}")]
    Evaluation { point: Vec<f64>, value: f64 },
    #[error("start point {point:?} lies outside the bounds")]
    StartOutside { point: Vec<f64> },
}

/// Minimise `objective` over the box `[lower, upper]`.
pub struct BoundedProblem<F> {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> BoundedProblem<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, objective: F) -> Result<Self, OptimizeError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(OptimizeError::Bounds(format!(
                "{} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(OptimizeError::Bounds(format!("dimension {k}: [{l}, {u}]")));
            }
        }
        Ok(BoundedProblem {
            lower,
            upper,
            objective,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub(crate) fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Result<f64, OptimizeError> {
        let v = (self.objective)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OptimizeError::Evaluation {
                point: x.to_vec(),
                value: v,
            })
        }
    }

    /// Evaluates points in parallel, returning values in input order.
    pub(crate) fn eval_all(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>, OptimizeError> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Pso,
    Ga,
    Local,
}

/// Particle-swarm coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoSettings {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of each bound range.
    pub max_velocity: f64,
}

impl Default for PsoSettings {
    fn default() -> Self {
        PsoSettings {
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            max_velocity: 0.5,
        }
    }
}

/// Genetic-algorithm operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each bound range.
    pub mutation_scale: f64,
    pub tournament: usize,
    pub elitism: usize,
    /// Blend-crossover extension beyond the parents.
    pub blend_alpha: f64,
}

impl Default for GaSettings {
    fn default() -> Self {
        GaSettings {
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_scale: 0.1,
            tournament: 3,
            elitism: 1,
            blend_alpha: 0.5,
        }
    }
}

/// Simplex settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSettings {
    /// Initial simplex edge as a fraction of each bound range.
    pub initial_step: f64,
    /// Simplex size (relative to the bound range) below which the search
    /// may stop.
    pub x_tolerance: f64,
}

impl Default for LocalSettings {
    fn default() -> Self {
        LocalSettings {
            initial_step: 0.1,
            x_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Swarm or population size; ignored by the simplex.
    pub population: usize,
    pub max_iterations: usize,
    /// Hard cap on objective evaluations; derived from the iteration limit
    /// when absent.
    pub max_evaluations: Option<usize>,
    /// Stop once the best value improves by less than this over
    /// `patience` iterations (simplex: once the vertex values differ by
    /// less than this).
    pub tolerance: f64,
    pub patience: usize,
    pub seed: u64,
    #[serde(default)]
    pub pso: PsoSettings,
    #[serde(default)]
    pub ga: GaSettings,
    #[serde(default)]
    pub local: LocalSettings,
}

impl SolverConfig {
    pub fn pso() -> Self {
        SolverConfig {
            kind: SolverKind::Pso,
            population: 200,
            max_iterations: 500,
            max_evaluations: None,
            tolerance: 1e-6,
            patience: 20,
            seed: 42,
            pso: PsoSettings::default(),
            ga: GaSettings::default(),
            local: LocalSettings::default(),
        }
    }

    pub fn ga() -> Self {
        SolverConfig {
            kind: SolverKind::Ga,
            population: 100,
            ..Self::pso()
        }
    }

    pub fn local() -> Self {
        SolverConfig {
            kind: SolverKind::Local,
            population: 1,
            max_iterations: 2000,
            tolerance: 1e-12,
            ..Self::pso()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn budget(&self, dim: usize) -> usize {
        self.max_evaluations.unwrap_or(match self.kind {
            SolverKind::Local => self.max_iterations * (dim + 2),
            _ => self.population * (self.max_iterations + 1),
        })
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        if self.kind != SolverKind::Local && self.population < 2 {
            return Err(OptimizeError::Config("population must be at least 2".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(OptimizeError::Config("tolerance must be non-negative".into()));
        }
        if self.kind == SolverKind::Ga && (self.ga.tournament == 0 || self.ga.elitism >= self.population) {
            return Err(OptimizeError::Config("tournament must be >= 1 and elitism < population".into()));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::pso()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Tolerance,
    Budget,
}

/// Best value after one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub reason: StopReason,
    pub history: Vec<IterationRecord>,
}

impl SolveOutcome {
    /// Per-iteration telemetry as CSV.
    pub fn telemetry_csv(&self) -> String {
        let mut s = String::from("iteration,evaluations,best_value\n");
        for r in &self.history {
            s.push_str(&format!("{},{},{}\n", r.iteration, r.evaluations, r.best_value));
        }
        s
    }
}

/// Runs the solver selected by `cfg.kind`. The simplex starts from `start`,
/// or from the box centre when none is given.
pub fn minimize<F: Fn(&[f64]) -> f64 + Sync>(
    problem: &BoundedProblem<F>,
    cfg: &SolverConfig,
    start: Option<&[f64]>,
) -> Result<SolveOutcome, OptimizeError> {
    match cfg.kind {
        SolverKind::Pso => pso_minimize(problem, cfg),
        SolverKind::Ga => ga_minimize(problem, cfg),
        SolverKind::Local => {
            let centre: Vec<f64>;
            let s = match start {
                Some(s) => s,
                None => {
                    centre = problem
                        .lower
                        .iter()
                        .zip(&problem.upper)
                        .map(|(l, u)| 0.5 * (l + u))
                        .collect();
                    &centre
                }
            };
            local_minimize(problem, s, cfg)
        }
    }
}

/// True when the best value has improved by less than `tol` over the last
/// `patience` iterations.
pub(crate) fn stalled(history: &[IterationRecord], patience: usize, tol: f64) -> bool {
    let n = history.len();
    patience > 0 && n > patience && history[n - 1 - patience].best_value - history[n - 1].best_value < tol
}
