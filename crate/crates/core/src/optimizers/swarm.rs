use rand_chacha::ChaCha8Rng;

use super::operators::{crossover, mutate, pick_peers, point_mutation, segment_crossover};
use super::{
    best_index, Algorithm, OptimizerConfig, OptimizerError, RunResult, Search, SelectionRule,
};
use crate::encoding::{Encoding, Particle};
use crate::model::{DatacenterId, ProblemInstance};
use crate::objective::FitnessWeights;

/// Hybrid discrete PSO: each particle is mutated against two random peers,
/// crossed with its personal best (`cr_p`) and then with the swarm best
/// (`cr_g`), repaired, and accepted according to `config.selection`.
pub fn de_dpso_dpa(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<RunResult, OptimizerError> {
    if config.population < 3 {
        return Err(OptimizerError::InstanceTooSmall {
            algorithm: Algorithm::DeDpso,
            needed: 3,
            got: config.population,
        });
    }
    run_swarm(
        Algorithm::DeDpso,
        instance,
        config,
        weights,
        |enc, swarm, i, gbest, cfg, rng| {
            let (a, b) = pick_peers(swarm.len(), i, rng);
            let x = &swarm[i];
            let u = mutate(
                enc,
                &x.position,
                &swarm[a].position,
                &swarm[b].position,
                cfg.scale_factor,
                rng,
            );
            let v = crossover(enc, &x.pbest, &u, cfg.cr_p, rng);
            crossover(enc, gbest, &v, cfg.cr_g, rng)
        },
    )
}

/// Discrete PSO without the differential mutation step.
pub fn baseline_dpso(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<RunResult, OptimizerError> {
    run_swarm(
        Algorithm::Dpso,
        instance,
        config,
        weights,
        |enc, swarm, i, gbest, cfg, rng| {
            let x = &swarm[i];
            let v = crossover(enc, &x.pbest, &x.position, cfg.cr_p, rng);
            crossover(enc, gbest, &v, cfg.cr_g, rng)
        },
    )
}

/// Discrete PSO with GA operators: a segment copied from the personal best,
/// then one from the swarm best, then a point mutation with probability `F`.
pub fn baseline_ga_dpso(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<RunResult, OptimizerError> {
    run_swarm(
        Algorithm::GaDpso,
        instance,
        config,
        weights,
        |enc, swarm, i, gbest, cfg, rng| {
            let x = &swarm[i];
            let v = segment_crossover(enc, &x.pbest, &x.position, rng);
            let mut w = segment_crossover(enc, gbest, &v, rng);
            point_mutation(enc, &mut w, cfg.scale_factor, rng);
            w
        },
    )
}

/// Shared swarm loop. Candidates for an iteration are all built from the
/// previous iteration's state, evaluated, then applied in particle order.
fn run_swarm(
    algorithm: Algorithm,
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
    mut candidate: impl FnMut(
        &Encoding,
        &[Particle],
        usize,
        &[DatacenterId],
        &OptimizerConfig,
        &mut ChaCha8Rng,
    ) -> Vec<DatacenterId>,
) -> Result<RunResult, OptimizerError> {
    config.validate()?;
    let mut search = Search::new(instance, config, weights);
    let mut swarm = search.initial_swarm(config.population);
    let g = best_index(&swarm);
    let mut gbest = swarm[g].position.clone();
    let mut gbest_fitness = swarm[g].fitness;
    let mut history = Vec::with_capacity(config.max_iterations);

    for _ in 0..config.max_iterations {
        let mut candidates = Vec::with_capacity(swarm.len());
        for i in 0..swarm.len() {
            let mut w = candidate(&search.encoding, &swarm, i, &gbest, config, &mut search.rng);
            search.repair(&mut w);
            candidates.push(w);
        }
        let evals = search.evaluate_all(&candidates);

        let threshold = gbest_fitness;
        for (i, (w, eval)) in candidates.into_iter().zip(evals).enumerate() {
            let p = &mut swarm[i];
            let f = eval.fitness;
            if f < p.pbest_fitness {
                p.pbest.clone_from(&w);
                p.pbest_fitness = f;
            }
            if f < gbest_fitness {
                gbest.clone_from(&w);
                gbest_fitness = f;
            }
            let bar = match config.selection {
                SelectionRule::Gbest => threshold,
                SelectionRule::Previous => p.fitness,
            };
            if f < bar {
                p.position = w;
                p.fitness = f;
            }
        }
        history.push(gbest_fitness);
    }

    Ok(search.finish(algorithm, gbest, history, config.convergence_window))
}
