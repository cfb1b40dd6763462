//! End-to-end placement: pin private data, optimize public data, assemble
//! the global map and its metrics.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{shared_dataset_partition, DatacenterId, DatasetPartition, ProblemInstance};
use crate::objective::{
    is_feasible, placement_cost, transfer_time, CostBreakdown, FitnessWeights, MovementTrace,
    Objective, ObjectiveError,
};
use crate::optimizers::{baseline_random, Algorithm, OptimizerConfig, OptimizerError};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

/// Random placements sampled to derive default normalisation constants.
pub const NORM_SAMPLES: u64 = 32;
const NORM_SEED: u64 = 0x5eed_0000;

/// Weights whose norms are the mean transfer time and cost of random
/// feasible placements on `instance`, so both terms are dimensionless and
/// comparable. A zero mean falls back to a norm of 1.
pub fn self_normalized_weights(
    instance: &ProblemInstance,
    w_time: f64,
    w_cost: f64,
) -> Result<FitnessWeights, StrategyError> {
    let probe = FitnessWeights::time_only();
    let (mut t, mut c) = (0.0, 0.0);
    for s in 0..NORM_SAMPLES {
        let cfg = OptimizerConfig::default().with_seed(NORM_SEED + s);
        let r = baseline_random(instance, &cfg, &probe)?;
        t += r.t_trans;
        c += r.c_cost;
    }
    let norm = |sum: f64| {
        let mean = sum / NORM_SAMPLES as f64;
        if mean > 0.0 {
            mean
        } else {
            1.0
        }
    };
    Ok(FitnessWeights::new(w_time, w_cost, norm(t), norm(c))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementMap {
    pub assignment: Vec<DatacenterId>,
    pub t_trans: f64,
    pub c_cost: f64,
    pub n_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyReport {
    pub algorithm: Algorithm,
    pub config: OptimizerConfig,
    pub weights: FitnessWeights,
    pub placement: PlacementMap,
    pub fitness: f64,
    pub cost: CostBreakdown,
    pub trace: MovementTrace,
    pub partition: DatasetPartition,
    pub fitness_history: Vec<f64>,
}

pub fn run_strategy(
    instance: &ProblemInstance,
    algorithm: Algorithm,
    config: &OptimizerConfig,
    weights: &FitnessWeights,
) -> Result<StrategyReport, StrategyError> {
    weights.validate()?;
    let partition = shared_dataset_partition(instance);

    let (assignment, n_iter, history) = if instance.public_dims().is_empty() {
        // nothing to optimize: private data stays home
        (instance.uniform_assignment(0), 0, Vec::new())
    } else {
        let run = algorithm.run(instance, config, weights)?;
        (run.best_position, run.n_iter, run.fitness_history)
    };

    let (t_trans, trace) = transfer_time(instance, &assignment)?;
    let cost = placement_cost(instance, &assignment)?;
    let fitness = Objective::new(instance, *weights).fitness(&assignment);
    debug_assert!(is_feasible(instance, &assignment).feasible);
    Ok(StrategyReport {
        algorithm,
        config: config.clone(),
        weights: *weights,
        placement: PlacementMap {
            assignment,
            t_trans,
            c_cost: cost.total,
            n_iter,
        },
        fitness,
        cost,
        trace,
        partition,
        fitness_history: history,
    })
}

impl StrategyReport {
    pub fn n_iter_cell(&self) -> String {
        match self.algorithm {
            Algorithm::Random => "-".to_string(),
            _ => self.placement.n_iter.to_string(),
        }
    }

    pub const METRICS_HEADER: &'static str =
        "algorithm,seed,t_trans,c_cost,n_iter,fitness,moves,moved_gb";

    pub fn metrics_row(&self) -> String {
        format!(
            "{},{},{:.2},{:.2},{},{:.6},{},{:.2}",
            self.algorithm,
            self.config.seed,
            self.placement.t_trans,
            self.placement.c_cost,
            self.n_iter_cell(),
            self.fitness,
            self.trace.total_moves,
            self.trace.total_gb
        )
    }

    /// One row per strategy, one column per dataset.
    pub fn placement_csv(&self) -> String {
        let n = self.placement.assignment.len();
        let mut out = String::from("strategy");
        for d in 0..n {
            let _ = write!(out, ",d{d}");
        }
        let _ = write!(out, "\n{}", self.algorithm);
        for dc in &self.placement.assignment {
            let _ = write!(out, ",dc{dc}");
        }
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let w = &self.weights;
        let _ = writeln!(out, "algorithm: {}", self.algorithm);
        let _ = writeln!(
            out,
            "config: population={} iterations={} F={} cr_p={} cr_g={} window={} seed={} selection={:?}",
            c.population, c.max_iterations, c.scale_factor, c.cr_p, c.cr_g, c.convergence_window, c.seed, c.selection
        );
        let _ = writeln!(
            out,
            "weights: w_time={} w_cost={} time_norm={:.6} cost_norm={:.6}",
            w.w_time, w.w_cost, w.time_norm, w.cost_norm
        );
        let p = &self.partition;
        let _ = writeln!(
            out,
            "datasets: private={} public_unshared={} public_shared_local={} public_shared_crossregion={}",
            p.private.len(),
            p.public_unshared.len(),
            p.public_shared_local.len(),
            p.public_shared_crossregion.len()
        );
        let _ = writeln!(out, "t_trans: {:.2} s", self.placement.t_trans);
        let k = &self.cost;
        let _ = writeln!(
            out,
            "c_cost: {:.2} $ (private {:.2}, public unshared {:.2}, public shared local {:.2}, public shared cross-region {:.2})",
            k.total, k.private, k.public_unshared, k.public_shared_local, k.public_shared_crossregion
        );
        let _ = writeln!(out, "n_iter: {}", self.n_iter_cell());
        let _ = writeln!(out, "fitness: {:.6}", self.fitness);
        let _ = writeln!(
            out,
            "moves: {} ({:.2} GB)",
            self.trace.total_moves, self.trace.total_gb
        );
        out.push_str("placement:\n");
        for (d, dc) in self.placement.assignment.iter().enumerate() {
            let _ = writeln!(out, "  d{d} -> dc{dc}");
        }
        out
    }
}
