//! Placement optimizers over the discrete particle encoding.
//!
//! [`Algorithm::DeDpso`] is the hybrid discrete PSO with differential
//! evolution operators. The others are comparison baselines: uniform
//! random placement, discrete DE, plain discrete PSO, and discrete PSO with
//! GA-style segment crossover.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{repair_capacity, Encoding, Particle};
use crate::model::{DatacenterId, ProblemInstance};
use crate::objective::{Evaluation, FitnessWeights, Objective, Workspace};

mod de;
pub mod operators;
mod random;
mod swarm;

pub use de::baseline_de;
pub use random::baseline_random;
pub use swarm::{baseline_dpso, baseline_ga_dpso, de_dpso_dpa};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("InstanceTooSmall: {algorithm} needs a population of at least {needed} to draw distinct peers, got {got}")]
    InstanceTooSmall {
        algorithm: Algorithm,
        needed: usize,
        got: usize,
    },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("UnknownAlgorithm: `{0}` (expected one of random, de, dpso, ga-dpso, de-dpso)")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Random,
    De,
    Dpso,
    GaDpso,
    DeDpso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Random,
        Algorithm::De,
        Algorithm::Dpso,
        Algorithm::GaDpso,
        Algorithm::DeDpso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::De => "de",
            Algorithm::Dpso => "dpso",
            Algorithm::GaDpso => "ga-dpso",
            Algorithm::DeDpso => "de-dpso",
        }
    }

    pub fn run(
        self,
        instance: &ProblemInstance,
        config: &OptimizerConfig,
        weights: &FitnessWeights,
    ) -> Result<RunResult, OptimizerError> {
        match self {
            Algorithm::Random => baseline_random(instance, config, weights),
            Algorithm::De => baseline_de(instance, config, weights),
            Algorithm::Dpso => baseline_dpso(instance, config, weights),
            Algorithm::GaDpso => baseline_ga_dpso(instance, config, weights),
            Algorithm::DeDpso => de_dpso_dpa(instance, config, weights),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| OptimizerError::UnknownAlgorithm(s.to_string()))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = OptimizerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.name().to_string()
    }
}

/// What a candidate must beat to replace a particle's position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Accept only candidates strictly better than the swarm's best. Keeps
    /// most particles frozen at their initial positions.
    Gbest,
    /// Accept candidates strictly better than the particle's own position.
    #[default]
    Previous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub scale_factor: f64,
    pub cr_p: f64,
    pub cr_g: f64,
    pub convergence_window: usize,
    pub seed: u64,
    pub selection: SelectionRule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            population: 100,
            max_iterations: 2000,
            scale_factor: 0.15,
            cr_p: 0.1,
            cr_g: 0.1,
            convergence_window: 80,
            seed: 0,
            selection: SelectionRule::Previous,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: String| Err(OptimizerError::InvalidConfig(m));
        if self.population < 2 {
            return bad(format!("population {} must be >= 2", self.population));
        }
        if !(self.scale_factor > 0.0 && self.scale_factor <= 1.0) {
            return bad(format!(
                "scale factor {} must be in (0, 1]",
                self.scale_factor
            ));
        }
        for (name, p) in [("cr_p", self.cr_p), ("cr_g", self.cr_g)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} must be in [0, 1]"));
            }
        }
        if self.convergence_window < 1 {
            return bad("convergence window must be >= 1".into());
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self
    }

    pub fn with_population(mut self, population: usize) -> Self {
        self.population = population;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub best_position: Vec<DatacenterId>,
    pub best_fitness: f64,
    pub t_trans: f64,
    pub c_cost: f64,
    pub n_iter: usize,
    /// Swarm-best fitness after each iteration.
    pub fitness_history: Vec<f64>,
}

/// 1-based index of the first iteration that starts a run of `window`
/// identical consecutive values; the history length if there is none.
pub fn detect_convergence(history: &[f64], window: usize) -> usize {
    let mut start = 0;
    for i in 1..=history.len() {
        if i == history.len() || history[i] != history[start] {
            if i - start >= window {
                return start + 1;
            }
            start = i;
        }
    }
    history.len()
}

/// State shared by the population-based optimizers.
pub(crate) struct Search<'a> {
    pub objective: Objective<'a>,
    pub encoding: Encoding,
    pub rng: ChaCha8Rng,
}

impl<'a> Search<'a> {
    pub fn new(
        instance: &'a ProblemInstance,
        config: &OptimizerConfig,
        weights: &FitnessWeights,
    ) -> Self {
        Search {
            objective: Objective::new(instance, *weights),
            encoding: Encoding::new(instance),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.objective.instance()
    }

    /// Wrap and capacity repair applied to every new candidate.
    pub fn repair(&self, position: &mut [DatacenterId]) {
        self.encoding.wrap_in_place(position);
        repair_capacity(self.instance(), position);
    }

    pub fn random_feasible(&mut self) -> Vec<DatacenterId> {
        let mut pos = self.encoding.random_position(&mut self.rng);
        self.repair(&mut pos);
        pos
    }

    /// Evaluates candidates in parallel; results come back in input order.
    pub fn evaluate_all(&self, candidates: &[Vec<DatacenterId>]) -> Vec<Evaluation> {
        candidates
            .par_iter()
            .map_init(Workspace::default, |ws, c| self.objective.evaluate(c, ws))
            .collect()
    }

    pub fn initial_swarm(&mut self, n: usize) -> Vec<Particle> {
        let positions: Vec<_> = (0..n).map(|_| self.random_feasible()).collect();
        let evals = self.evaluate_all(&positions);
        positions
            .into_iter()
            .zip(evals)
            .map(|(p, e)| Particle::new(p, e.fitness))
            .collect()
    }

    pub fn finish(
        &self,
        algorithm: Algorithm,
        best: Vec<DatacenterId>,
        history: Vec<f64>,
        window: usize,
    ) -> RunResult {
        let eval = self.objective.evaluate(&best, &mut Workspace::default());
        let n_iter = if history.is_empty() {
            0
        } else {
            detect_convergence(&history, window)
        };
        RunResult {
            algorithm,
            best_position: best,
            best_fitness: eval.fitness,
            t_trans: eval.t_trans,
            c_cost: eval.c_cost,
            n_iter,
            fitness_history: history,
        }
    }
}

/// Index of the best particle; lowest index on ties.
pub(crate) fn best_index(particles: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in particles.iter().enumerate().skip(1) {
        if p.fitness < particles[best].fitness {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_converges_at_one() {
        assert_eq!(detect_convergence(&[3.0; 100], 80), 1);
    }

    #[test]
    fn decreasing_history_never_converges() {
        let h: Vec<f64> = (0..100).map(|i| 100.0 - i as f64).collect();
        assert_eq!(detect_convergence(&h, 80), 100);
    }

    #[test]
    fn plateau_after_first_step() {
        let mut h = vec![5.0];
        h.extend(std::iter::repeat_n(4.0, 80));
        assert_eq!(detect_convergence(&h, 80), 2);
        // one short of the window
        h.pop();
        assert_eq!(detect_convergence(&h, 80), 80);
    }

    #[test]
    fn first_qualifying_plateau_wins() {
        let h = [9.0, 9.0, 8.0, 8.0, 8.0, 7.0, 7.0, 7.0, 7.0];
        assert_eq!(detect_convergence(&h, 3), 3);
        assert_eq!(detect_convergence(&h, 4), 6);
        assert_eq!(detect_convergence(&h, 1), 1);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!(
            "pso".parse::<Algorithm>(),
            Err(OptimizerError::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(OptimizerConfig {
            population: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            cr_p: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            scale_factor: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            convergence_window: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
