use super::{Algorithm, OptimizerConfig, OptimizerError, RunResult, Search};
use crate::model::ProblemInstance;
use crate::objective::FitnessWeights;

/// One uniformly random placement of the public datasets, repaired to fit.
/// Reported with a single iteration.
pub fn baseline_random(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<RunResult, OptimizerError> {
    config.validate()?;
    let mut search = Search::new(instance, config, weights);
    let position = search.random_feasible();
    let mut result = search.finish(
        Algorithm::Random,
        position,
        Vec::new(),
        config.convergence_window,
    );
    result.fitness_history.push(result.best_fitness);
    result.n_iter = 1;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, Datacenter, Dataset, Environment, Task, Workflow};
    use crate::objective::is_feasible;

    fn env3() -> Environment {
        Environment {
            datacenters: vec![
                Datacenter::cloud(0, 0),
                Datacenter::edge(1, 0, 10.0),
                Datacenter::edge(2, 0, 10.0),
            ],
            bandwidth: vec![
                vec![0.0, 10.0, 20.0],
                vec![10.0, 0.0, 150.0],
                vec![20.0, 150.0, 0.0],
            ],
        }
    }

    fn with(datasets: Vec<Dataset>) -> ProblemInstance {
        let tasks = vec![Task {
            id: 0,
            workflow: 0,
            inputs: (0..datasets.len()).collect(),
            outputs: vec![],
            placed_at: None,
        }];
        let wfs = vec![Workflow {
            id: 0,
            region: 0,
            tasks: vec![0],
            edges: vec![],
        }];
        validate_instance(env3(), wfs, tasks, datasets).unwrap()
    }

    #[test]
    fn all_private_maps_to_homes() {
        let inst = with(vec![
            Dataset::private(0, 1.0, 0.1, 1),
            Dataset::private(1, 1.0, 0.1, 2),
        ]);
        let r = baseline_random(
            &inst,
            &OptimizerConfig::default(),
            &FitnessWeights::time_only(),
        )
        .unwrap();
        assert_eq!(r.best_position, vec![1, 2]);
        assert_eq!(r.n_iter, 1);
    }

    #[test]
    fn single_public_dataset_is_uniform() {
        let inst = with(vec![Dataset::public(0, 1.0, 0.1)]);
        let draws = 10_000;
        let mut counts = [0usize; 3];
        for seed in 0..draws {
            let cfg = OptimizerConfig::default().with_seed(seed);
            let r = baseline_random(&inst, &cfg, &FitnessWeights::time_only()).unwrap();
            counts[r.best_position[0]] += 1;
        }
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square, 2 degrees of freedom, p = 0.001
        assert!(chi2 < 13.82, "counts {counts:?} chi2 {chi2}");
    }

    #[test]
    fn always_feasible() {
        let inst = with((0..6).map(|i| Dataset::public(i, 4.0, 0.1)).collect());
        for seed in 0..200 {
            let cfg = OptimizerConfig::default().with_seed(seed);
            let r = baseline_random(&inst, &cfg, &FitnessWeights::time_only()).unwrap();
            assert!(is_feasible(&inst, &r.best_position).feasible);
        }
    }
}
