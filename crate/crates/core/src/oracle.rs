//! Exhaustive search over every placement of the public datasets. Only for
//! small instances; used to check the optimizers.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{DatacenterId, ProblemInstance};
use crate::objective::{FitnessWeights, Objective, Workspace};

/// Largest search space the oracle will enumerate.
pub const MAX_COMBINATIONS: u128 = 10_000_000;

/// Relative slack used to collect co-optimal placements.
const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(
        "TooManyCombinations: {dcs}^{dims} placements exceeds the limit of {MAX_COMBINATIONS}"
    )]
    TooManyCombinations { dcs: usize, dims: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Lexicographically first optimal placement.
    pub best_position: Vec<DatacenterId>,
    pub best_fitness: f64,
    /// Every placement whose fitness ties the optimum.
    pub optimal: Vec<Vec<DatacenterId>>,
    pub combinations: u64,
}

pub fn combinations(instance: &ProblemInstance) -> Option<u128> {
    let dcs = instance.dc_count() as u128;
    let mut total: u128 = 1;
    for _ in instance.public_dims() {
        total = total.checked_mul(dcs)?;
        if total > MAX_COMBINATIONS {
            return None;
        }
    }
    Some(total)
}

fn position_at(
    base: &[DatacenterId],
    dims: &[usize],
    dcs: usize,
    mut index: u64,
) -> Vec<DatacenterId> {
    let mut pos = base.to_vec();
    // last public dimension varies fastest
    for &k in dims.iter().rev() {
        pos[k] = (index % dcs as u64) as usize;
        index /= dcs as u64;
    }
    pos
}

pub fn exhaustive_search(
    instance: &ProblemInstance,
    weights: &FitnessWeights,
) -> Result<OracleResult, OracleError> {
    let total = combinations(instance).ok_or(OracleError::TooManyCombinations {
        dcs: instance.dc_count(),
        dims: instance.public_dims().len(),
    })? as u64;
    let objective = Objective::new(instance, *weights);
    let base = instance.uniform_assignment(0);
    let dims = instance.public_dims();
    let dcs = instance.dc_count();

    const CHUNK: u64 = 4096;
    let chunks = total.div_ceil(CHUNK);
    let per_chunk: Vec<(f64, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = Workspace::default();
            let mut best = f64::INFINITY;
            let mut ties = Vec::new();
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let f = objective
                    .evaluate(&position_at(&base, dims, dcs, index), &mut ws)
                    .fitness;
                if best.is_infinite() || f < best - best.abs() * TIE_RTOL {
                    best = f;
                    ties.clear();
                    ties.push(index);
                } else if f <= best + best.abs() * TIE_RTOL {
                    ties.push(index);
                }
            }
            (best, ties)
        })
        .collect();

    let best_fitness = per_chunk
        .iter()
        .map(|(f, _)| *f)
        .fold(f64::INFINITY, f64::min);
    let slack = best_fitness.abs() * TIE_RTOL;
    let optimal: Vec<Vec<DatacenterId>> = per_chunk
        .iter()
        .filter(|(f, _)| *f <= best_fitness + slack)
        .flat_map(|(_, ties)| ties.iter().copied())
        .map(|i| position_at(&base, dims, dcs, i))
        .filter(|p| objective.fitness(p) <= best_fitness + slack)
        .collect();
    Ok(OracleResult {
        best_position: optimal[0].clone(),
        best_fitness,
        optimal,
        combinations: total,
    })
}
