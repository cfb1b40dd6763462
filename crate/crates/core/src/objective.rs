//! Transfer time, placement cost, capacity feasibility, and the scalar
//! fitness shared by every optimizer.
//!
//! Unless a task carries a fixed placement, it runs at the datacenter that holds
//! the largest share (by GB) of its inputs; ties go to the lowest datacenter
//! id, and a task without inputs runs where the bulk of its outputs live.
//! Every input stored elsewhere is moved to the task, and every output whose
//! assigned datacenter differs from the task's is moved there once it is
//! produced. A `(dataset, from, to)` transfer is counted at most once per
//! evaluation, so consumers of a shared dataset at the same site reuse the
//! copy.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DatacenterId, DatasetId, ProblemInstance, Task};

/// 1 GB = 1024 MB; sizes are GB, bandwidth MB/s.
pub const MB_PER_GB: f64 = 1024.0;

/// Penalty weight per GB of overflow and per misplaced private dataset.
pub const PENALTY: f64 = 1e6;

const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(
        "UnassignedDataset: dataset {dataset} has no datacenter (assignment covers {len} datasets)"
    )]
    UnassignedDataset { dataset: DatasetId, len: usize },
    #[error("UnknownDatacenter: dataset {dataset} assigned to datacenter {datacenter}, which does not exist")]
    UnknownDatacenter {
        dataset: DatasetId,
        datacenter: DatacenterId,
    },
    #[error("InvalidWeights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub dataset: DatasetId,
    pub from: DatacenterId,
    pub to: DatacenterId,
    pub size_gb: f64,
    pub seconds: f64,
}

/// Every inter-datacenter transfer implied by an assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MovementTrace {
    pub moves: Vec<Move>,
    pub total_moves: usize,
    pub total_gb: f64,
}

impl MovementTrace {
    pub fn total_seconds(&self) -> f64 {
        self.moves.iter().map(|m| m.seconds).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,from,to,gb,seconds\n");
        for m in &self.moves {
            let _ = writeln!(
                out,
                "{},{},{},{:.2},{:.2}",
                m.dataset, m.from, m.to, m.size_gb, m.seconds
            );
        }
        out
    }
}

/// Placement cost split by dataset class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub total: f64,
    pub private: f64,
    pub public_unshared: f64,
    pub public_shared_local: f64,
    pub public_shared_crossregion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcLoad {
    pub datacenter: DatacenterId,
    pub load_gb: f64,
    /// `None` for unbounded (cloud) datacenters.
    pub capacity_gb: Option<f64>,
    pub overflow_gb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub loads: Vec<DcLoad>,
    pub overflow_gb: f64,
    pub misplaced_private: Vec<DatasetId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub w_time: f64,
    pub w_cost: f64,
    /// Seconds that count as one unit of fitness.
    pub time_norm: f64,
    /// Dollars that count as one unit of fitness.
    pub cost_norm: f64,
}

impl FitnessWeights {
    pub fn new(
        w_time: f64,
        w_cost: f64,
        time_norm: f64,
        cost_norm: f64,
    ) -> Result<Self, ObjectiveError> {
        let w = FitnessWeights {
            w_time,
            w_cost,
            time_norm,
            cost_norm,
        };
        w.validate()?;
        Ok(w)
    }

    /// Raw seconds only.
    pub fn time_only() -> Self {
        FitnessWeights {
            w_time: 1.0,
            w_cost: 0.0,
            time_norm: 1.0,
            cost_norm: 1.0,
        }
    }

    /// Raw dollars only.
    pub fn cost_only() -> Self {
        FitnessWeights {
            w_time: 0.0,
            w_cost: 1.0,
            time_norm: 1.0,
            cost_norm: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.w_time)
            || !finite_nonneg(self.w_cost)
            || self.w_time + self.w_cost <= 0.0
        {
            return Err(ObjectiveError::InvalidWeights(format!(
                "weights ({}, {}) must be >= 0 with a positive sum",
                self.w_time, self.w_cost
            )));
        }
        if !(self.time_norm > 0.0
            && self.time_norm.is_finite()
            && self.cost_norm > 0.0
            && self.cost_norm.is_finite())
        {
            return Err(ObjectiveError::InvalidWeights(format!(
                "norms ({}, {}) must be > 0",
                self.time_norm, self.cost_norm
            )));
        }
        Ok(())
    }
}

/// Checks that `assignment` names an existing datacenter for every dataset.
pub fn check_assignment(
    instance: &ProblemInstance,
    assignment: &[DatacenterId],
) -> Result<(), ObjectiveError> {
    let n = instance.datasets().len();
    if assignment.len() < n {
        return Err(ObjectiveError::UnassignedDataset {
            dataset: assignment.len(),
            len: assignment.len(),
        });
    }
    if let Some((dataset, &datacenter)) = assignment
        .iter()
        .enumerate()
        .find(|(_, &dc)| dc >= instance.dc_count())
    {
        return Err(ObjectiveError::UnknownDatacenter {
            dataset,
            datacenter,
        });
    }
    Ok(())
}

/// The datacenter a task executes at under `assignment`: its fixed
/// placement if it has one, otherwise the datacenter holding most of its
/// input GB (outputs for tasks without inputs), lowest id on ties.
pub fn execution_site(
    instance: &ProblemInstance,
    task: &Task,
    assignment: &[DatacenterId],
) -> Option<DatacenterId> {
    let mut loads = vec![0.0; instance.dc_count()];
    site_of(instance, task, assignment, &mut loads)
}

fn site_of(
    instance: &ProblemInstance,
    task: &Task,
    assignment: &[DatacenterId],
    loads: &mut [f64],
) -> Option<DatacenterId> {
    if task.placed_at.is_some() {
        return task.placed_at;
    }
    let basis = if task.inputs.is_empty() {
        &task.outputs
    } else {
        &task.inputs
    };
    if basis.is_empty() {
        return None;
    }
    loads.iter_mut().for_each(|l| *l = 0.0);
    let datasets = instance.datasets();
    for &d in basis {
        loads[assignment[d]] += datasets[d].size_gb;
    }
    let mut best = 0;
    for (dc, &load) in loads.iter().enumerate().skip(1) {
        if load > loads[best] + TIE_EPS {
            best = dc;
        }
    }
    Some(best)
}

/// Reusable buffers for [`Objective::evaluate`].
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    loads: Vec<f64>,
    moves: Vec<(DatasetId, DatacenterId, DatacenterId)>,
}

/// Everything an optimizer needs to know about one assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub t_trans: f64,
    pub c_cost: f64,
    pub overflow_gb: f64,
    pub misplaced_private: usize,
    pub fitness: f64,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.overflow_gb == 0.0 && self.misplaced_private == 0
    }
}

/// Fitness evaluator bound to one instance and one set of weights.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    instance: &'a ProblemInstance,
    weights: FitnessWeights,
}

impl<'a> Objective<'a> {
    pub fn new(instance: &'a ProblemInstance, weights: FitnessWeights) -> Self {
        Objective { instance, weights }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.instance
    }

    pub fn weights(&self) -> FitnessWeights {
        self.weights
    }

    /// Collects the deduplicated move set into `ws.moves`.
    fn collect_moves(&self, assignment: &[DatacenterId], ws: &mut Workspace) {
        let inst = self.instance;
        ws.loads.resize(inst.dc_count(), 0.0);
        ws.moves.clear();
        for task in inst.tasks() {
            let Some(site) = site_of(inst, task, assignment, &mut ws.loads) else {
                continue;
            };
            for &d in &task.inputs {
                if assignment[d] != site {
                    ws.moves.push((d, assignment[d], site));
                }
            }
            for &d in &task.outputs {
                if assignment[d] != site {
                    ws.moves.push((d, site, assignment[d]));
                }
            }
        }
        ws.moves.sort_unstable();
        ws.moves.dedup();
    }

    fn seconds(&self, d: DatasetId, from: DatacenterId, to: DatacenterId) -> f64 {
        self.instance.datasets()[d].size_gb * MB_PER_GB / self.instance.env().band(from, to)
    }

    /// Transfer time, cost, and feasibility in one pass. `assignment` must be
    /// in range; see [`check_assignment`].
    pub fn evaluate(&self, assignment: &[DatacenterId], ws: &mut Workspace) -> Evaluation {
        let inst = self.instance;
        self.collect_moves(assignment, ws);
        let t_trans: f64 = ws
            .moves
            .iter()
            .map(|&(d, from, to)| self.seconds(d, from, to))
            .sum();
        let c_cost: f64 = inst
            .datasets()
            .iter()
            .map(|d| inst.cost_rate(d.id, assignment[d.id]))
            .sum();

        ws.loads.iter_mut().for_each(|l| *l = 0.0);
        let mut misplaced_private = 0;
        for d in inst.datasets() {
            ws.loads[assignment[d.id]] += d.size_gb;
            if d.private && d.home != Some(assignment[d.id]) {
                misplaced_private += 1;
            }
        }
        let overflow_gb: f64 = inst
            .env()
            .datacenters
            .iter()
            .map(|dc| dc.capacity.overflow(ws.loads[dc.id]))
            .sum();

        let w = &self.weights;
        let penalty = PENALTY * (overflow_gb + misplaced_private as f64);
        let fitness =
            w.w_time * (t_trans / w.time_norm) + w.w_cost * (c_cost / w.cost_norm) + penalty;
        Evaluation {
            t_trans,
            c_cost,
            overflow_gb,
            misplaced_private,
            fitness,
        }
    }

    pub fn fitness(&self, assignment: &[DatacenterId]) -> f64 {
        self.evaluate(assignment, &mut Workspace::default()).fitness
    }

    pub fn trace(&self, assignment: &[DatacenterId]) -> MovementTrace {
        let mut ws = Workspace::default();
        self.collect_moves(assignment, &mut ws);
        let moves: Vec<Move> = ws
            .moves
            .iter()
            .map(|&(d, from, to)| Move {
                dataset: d,
                from,
                to,
                size_gb: self.instance.datasets()[d].size_gb,
                seconds: self.seconds(d, from, to),
            })
            .collect();
        MovementTrace {
            total_moves: moves.len(),
            total_gb: moves.iter().map(|m| m.size_gb).sum(),
            moves,
        }
    }
}

/// Total transfer time in seconds together with the moves behind it.
pub fn transfer_time(
    instance: &ProblemInstance,
    assignment: &[DatacenterId],
) -> Result<(f64, MovementTrace), ObjectiveError> {
    check_assignment(instance, assignment)?;
    let trace = Objective::new(instance, FitnessWeights::time_only()).trace(assignment);
    Ok((trace.total_seconds(), trace))
}

pub fn placement_cost(
    instance: &ProblemInstance,
    assignment: &[DatacenterId],
) -> Result<CostBreakdown, ObjectiveError> {
    check_assignment(instance, assignment)?;
    let mut c = CostBreakdown::default();
    for d in instance.datasets() {
        let cost = instance.cost_rate(d.id, assignment[d.id]);
        let bucket = match (d.private, d.shared, d.cross_region) {
            (true, _, _) => &mut c.private,
            (false, false, _) => &mut c.public_unshared,
            (false, true, false) => &mut c.public_shared_local,
            (false, true, true) => &mut c.public_shared_crossregion,
        };
        *bucket += cost;
        c.total += cost;
    }
    Ok(c)
}

/// Capacity and private-home check. `assignment` must be in range.
pub fn is_feasible(instance: &ProblemInstance, assignment: &[DatacenterId]) -> FeasibilityReport {
    let mut load = vec![0.0; instance.dc_count()];
    let mut misplaced_private = Vec::new();
    for d in instance.datasets() {
        load[assignment[d.id]] += d.size_gb;
        if d.private && d.home != Some(assignment[d.id]) {
            misplaced_private.push(d.id);
        }
    }
    let loads: Vec<DcLoad> = instance
        .env()
        .datacenters
        .iter()
        .map(|dc| DcLoad {
            datacenter: dc.id,
            load_gb: load[dc.id],
            capacity_gb: dc.capacity.as_gb(),
            overflow_gb: dc.capacity.overflow(load[dc.id]),
        })
        .collect();
    let overflow_gb: f64 = loads.iter().map(|l| l.overflow_gb).sum();
    FeasibilityReport {
        feasible: overflow_gb == 0.0 && misplaced_private.is_empty(),
        loads,
        overflow_gb,
        misplaced_private,
    }
}

pub fn fitness(
    instance: &ProblemInstance,
    assignment: &[DatacenterId],
    weights: &FitnessWeights,
) -> f64 {
    Objective::new(instance, *weights).fitness(assignment)
}
