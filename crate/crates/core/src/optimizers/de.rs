use rand::Rng;

use super::operators::{mutate, pick_peers};
use super::{best_index, Algorithm, OptimizerConfig, OptimizerError, RunResult, Search};
use crate::model::ProblemInstance;
use crate::objective::FitnessWeights;

/// Discrete differential evolution: differential mutation, binomial
/// crossover against the particle's own position at rate `cr_g` (one forced
/// dimension), and greedy one-to-one replacement.
pub fn baseline_de(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<RunResult, OptimizerError> {
    config.validate()?;
    if config.population < 3 {
        return Err(OptimizerError::InstanceTooSmall {
            algorithm: Algorithm::De,
            needed: 3,
            got: config.population,
        });
    }
    let mut search = Search::new(instance, config, weights);
    let mut pop = search.initial_swarm(config.population);
    let g = best_index(&pop);
    let mut best = pop[g].position.clone();
    let mut best_fitness = pop[g].fitness;
    let mut history = Vec::with_capacity(config.max_iterations);
    let dims = search.encoding.public_dims().to_vec();

    for _ in 0..config.max_iterations {
        let mut trials = Vec::with_capacity(pop.len());
        for i in 0..pop.len() {
            let (a, b) = pick_peers(pop.len(), i, &mut search.rng);
            let x = &pop[i].position;
            let u = mutate(
                &search.encoding,
                x,
                &pop[a].position,
                &pop[b].position,
                config.scale_factor,
                &mut search.rng,
            );
            let mut y = x.clone();
            if !dims.is_empty() {
                let forced = dims[search.rng.random_range(0..dims.len())];
                for &k in &dims {
                    if k == forced || search.rng.random::<f64>() < config.cr_g {
                        y[k] = u[k];
                    }
                }
            }
            search.repair(&mut y);
            trials.push(y);
        }
        let evals = search.evaluate_all(&trials);
        for (p, (y, eval)) in pop.iter_mut().zip(trials.into_iter().zip(evals)) {
            if eval.fitness < p.fitness {
                if eval.fitness < best_fitness {
                    best.clone_from(&y);
                    best_fitness = eval.fitness;
                }
                p.position = y;
                p.fitness = eval.fitness;
            }
        }
        history.push(best_fitness);
    }

    Ok(search.finish(Algorithm::De, best, history, config.convergence_window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, Datacenter, Dataset, Environment, Task, Workflow};

    fn pinned_pair() -> ProblemInstance {
        let env = Environment {
            datacenters: vec![Datacenter::cloud(0, 0), Datacenter::edge(1, 0, 100.0)],
            bandwidth: vec![vec![0.0, 20.0], vec![20.0, 0.0]],
        };
        let ds = vec![
            Dataset::public(0, 1.0, 1.0),
            Dataset::private(1, 2.0, 1.0, 1),
        ];
        let tasks = vec![Task {
            id: 0,
            workflow: 0,
            inputs: vec![0, 1],
            outputs: vec![],
            placed_at: None,
        }];
        let wfs = vec![Workflow {
            id: 0,
            region: 0,
            tasks: vec![0],
            edges: vec![],
        }];
        validate_instance(env, wfs, tasks, ds).unwrap()
    }

    #[test]
    fn finds_colocated_placement() {
        let cfg = OptimizerConfig {
            population: 10,
            max_iterations: 50,
            ..Default::default()
        };
        let r = baseline_de(&pinned_pair(), &cfg, &FitnessWeights::time_only()).unwrap();
        assert_eq!(r.best_position, vec![1, 1]);
        assert!(r.fitness_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_iterations() {
        let cfg = OptimizerConfig {
            population: 10,
            max_iterations: 0,
            ..Default::default()
        };
        let r = baseline_de(&pinned_pair(), &cfg, &FitnessWeights::time_only()).unwrap();
        assert_eq!(r.n_iter, 0);
        assert!(r.fitness_history.is_empty());
    }
}
