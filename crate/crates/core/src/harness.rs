//! Parameter sweeps with repeated seeded trials, summarised as CSV.
//!
//! Every algorithm in a cell sees the same instance and the same optimizer
//! seed for a given trial, so comparisons between algorithms are paired.
//! Trial `k` uses optimizer seed `base_seed + k` and, for generated
//! workloads, generator seed `spec.seed + k`.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{load_instance, FormatError};
use crate::model::{Capacity, ProblemInstance};
use crate::objective::FitnessWeights;
use crate::optimizers::{Algorithm, OptimizerConfig};
use crate::strategy::{run_strategy, self_normalized_weights, StrategyError, StrategyReport};
use crate::workloads::{generate, load_fixture, GeneratorSpec, WorkloadError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("InvalidPlan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("{axis}={value} {algorithm} trial {trial}: {source}")]
    Run {
        axis: SweepAxis,
        value: f64,
        algorithm: Algorithm,
        trial: usize,
        source: Box<HarnessError>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanBase {
    Fixture(String),
    Instance(PathBuf),
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BandwidthMultiplier,
    EdgeCapacity,
    EdgeDcCount,
    WorkflowCount,
    PrivateRatio,
    SharedRatio,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::BandwidthMultiplier => "bandwidth_multiplier",
            SweepAxis::EdgeCapacity => "edge_capacity",
            SweepAxis::EdgeDcCount => "edge_dc_count",
            SweepAxis::WorkflowCount => "workflow_count",
            SweepAxis::PrivateRatio => "private_ratio",
            SweepAxis::SharedRatio => "shared_ratio",
        })
    }
}

/// Objective weights. Norms left out are derived per instance from random
/// placements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub w_time: f64,
    pub w_cost: f64,
    #[serde(default)]
    pub time_norm: Option<f64>,
    #[serde(default)]
    pub cost_norm: Option<f64>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec {
            w_time: 0.5,
            w_cost: 0.5,
            time_norm: None,
            cost_norm: None,
        }
    }
}

impl WeightSpec {
    pub fn resolve(&self, instance: &ProblemInstance) -> Result<FitnessWeights, StrategyError> {
        match (self.time_norm, self.cost_norm) {
            (Some(t), Some(c)) => Ok(FitnessWeights::new(self.w_time, self.w_cost, t, c)?),
            (t, c) => {
                let auto = self_normalized_weights(instance, self.w_time, self.w_cost)?;
                Ok(FitnessWeights::new(
                    self.w_time,
                    self.w_cost,
                    t.unwrap_or(auto.time_norm),
                    c.unwrap_or(auto.cost_norm),
                )?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub base: PlanBase,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::InvalidPlan(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidPlan(m.to_string()));
        if self.repeats == 0 {
            return bad("repeats must be >= 1");
        }
        if self.values.is_empty() {
            return bad("axis values must not be empty");
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty");
        }
        let generator_only = matches!(
            self.axis,
            SweepAxis::EdgeDcCount
                | SweepAxis::WorkflowCount
                | SweepAxis::PrivateRatio
                | SweepAxis::SharedRatio
        );
        if generator_only && !matches!(self.base, PlanBase::Generator(_)) {
            return Err(HarnessError::InvalidPlan(format!(
                "axis {} needs a generator base",
                self.axis
            )));
        }
        if matches!(self.axis, SweepAxis::EdgeDcCount | SweepAxis::WorkflowCount)
            && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0)
        {
            return Err(HarnessError::InvalidPlan(format!(
                "axis {} takes positive integers",
                self.axis
            )));
        }
        Ok(())
    }

    fn instance(&self, value: f64, trial: usize) -> Result<ProblemInstance, HarnessError> {
        let inst = match &self.base {
            PlanBase::Generator(spec) => {
                let mut spec = spec.clone();
                spec.seed = spec.seed.wrapping_add(trial as u64);
                match self.axis {
                    SweepAxis::BandwidthMultiplier => spec.bandwidth_multiplier = value,
                    SweepAxis::EdgeCapacity => spec.edge_capacity_gb = value,
                    SweepAxis::EdgeDcCount => spec.edge_dcs = value as usize,
                    SweepAxis::WorkflowCount => spec.workflows = value as usize,
                    SweepAxis::PrivateRatio => spec.private_ratio = value,
                    SweepAxis::SharedRatio => spec.shared_ratio = value,
                }
                return Ok(generate(&spec)?);
            }
            PlanBase::Fixture(name) => load_fixture(name)?,
            PlanBase::Instance(path) => load_instance(path)?,
        };
        let mut env = inst.env().clone();
        match self.axis {
            SweepAxis::BandwidthMultiplier => env.scale_edge_bandwidth(value),
            SweepAxis::EdgeCapacity => {
                for dc in env.datacenters.iter_mut().filter(|dc| dc.is_edge()) {
                    dc.capacity = Capacity::Gb(value);
                }
            }
            _ => unreachable!("rejected by validate"),
        }
        Ok(inst.with_environment(env).map_err(WorkloadError::from)?)
    }
}

/// Aggregated results of one (axis value, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub value: f64,
    pub algorithm: Algorithm,
    pub t_trans: MeanSd,
    pub c_cost: MeanSd,
    pub n_iter: MeanSd,
    pub fitness: MeanSd,
    pub reports: Vec<StrategyReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; zero for a single observation.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

pub const CSV_HEADER: &str =
    "axis,value,algorithm,repeats,t_trans_mean,t_trans_sd,c_cost_mean,c_cost_sd,n_iter_mean,n_iter_sd,fitness_mean,fitness_sd";

#[derive(Debug, Clone)]
pub struct ExperimentTable {
    pub axis: SweepAxis,
    pub repeats: usize,
    pub base_seed: u64,
    pub cells: Vec<CellSummary>,
}

impl ExperimentTable {
    fn preamble(axis: SweepAxis, repeats: usize, base_seed: u64) -> String {
        format!(
            "# axis={axis} repeats={repeats}; trial k uses seed base_seed+k (base_seed={base_seed})\n{CSV_HEADER}\n"
        )
    }

    fn row(axis: SweepAxis, repeats: usize, c: &CellSummary) -> String {
        let iter = if c.algorithm == Algorithm::Random {
            "-,-".to_string()
        } else {
            format!("{:.0},{:.0}", c.n_iter.mean, c.n_iter.sd)
        };
        format!(
            "{axis},{},{},{repeats},{:.2},{:.2},{:.2},{:.2},{iter},{:.6},{:.6}\n",
            c.value,
            c.algorithm,
            c.t_trans.mean,
            c.t_trans.sd,
            c.c_cost.mean,
            c.c_cost.sd,
            c.fitness.mean,
            c.fitness.sd
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::preamble(self.axis, self.repeats, self.base_seed);
        for c in &self.cells {
            out.push_str(&Self::row(self.axis, self.repeats, c));
        }
        out
    }

    pub fn cell(&self, value: f64, algorithm: Algorithm) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.value == value && c.algorithm == algorithm)
    }
}

/// Outcome of [`run_experiment`]: the CSV text is always complete up to the
/// first failing cell, which is marked with a `FAILED` row.
pub struct ExperimentOutcome {
    pub csv: String,
    pub result: Result<ExperimentTable, HarnessError>,
}

pub fn run_experiment(plan: &ExperimentPlan) -> ExperimentOutcome {
    let preamble = ExperimentTable::preamble(plan.axis, plan.repeats, plan.base_seed);
    if let Err(e) = plan.validate().and_then(|_| {
        plan.optimizer
            .validate()
            .map_err(|e| HarnessError::InvalidPlan(e.to_string()))
    }) {
        return ExperimentOutcome {
            csv: format!("{preamble}FAILED,{e}\n"),
            result: Err(e),
        };
    }

    // one instance and one set of weights per (value, trial), shared by all algorithms
    let setups: Vec<Result<(ProblemInstance, FitnessWeights), HarnessError>> = plan
        .values
        .par_iter()
        .flat_map_iter(|&v| (0..plan.repeats).map(move |t| (v, t)))
        .map(|(v, t)| {
            let inst = plan.instance(v, t)?;
            let w = plan.weights.resolve(&inst)?;
            Ok((inst, w))
        })
        .collect();

    let jobs: Vec<(usize, Algorithm, usize)> = (0..plan.values.len())
        .flat_map(|vi| {
            plan.algorithms
                .iter()
                .flat_map(move |&a| (0..plan.repeats).map(move |t| (vi, a, t)))
        })
        .collect();
    let runs: Vec<Result<StrategyReport, HarnessError>> = jobs
        .par_iter()
        .map(|&(vi, alg, t)| {
            let value = plan.values[vi];
            let wrap = |e: HarnessError| HarnessError::Run {
                axis: plan.axis,
                value,
                algorithm: alg,
                trial: t,
                source: Box::new(e),
            };
            let (inst, w) = match &setups[vi * plan.repeats + t] {
                Ok(s) => s,
                Err(e) => return Err(wrap(HarnessError::InvalidPlan(e.to_string()))),
            };
            let cfg = plan
                .optimizer
                .clone()
                .with_seed(plan.base_seed.wrapping_add(t as u64));
            run_strategy(inst, alg, &cfg, w).map_err(|e| wrap(e.into()))
        })
        .collect();

    let mut csv = preamble;
    let mut cells = Vec::new();
    let mut runs = runs.into_iter();
    for &value in &plan.values {
        for &algorithm in &plan.algorithms {
            let mut reports = Vec::with_capacity(plan.repeats);
            for _ in 0..plan.repeats {
                match runs.next().expect("one run per job") {
                    Ok(r) => reports.push(r),
                    Err(e) => {
                        let _ = writeln!(csv, "{},{},{},FAILED,{}", plan.axis, value, algorithm, e);
                        return ExperimentOutcome {
                            csv,
                            result: Err(e),
                        };
                    }
                }
            }
            let pick = |f: fn(&StrategyReport) -> f64| {
                MeanSd::of(&reports.iter().map(f).collect::<Vec<_>>())
            };
            let cell = CellSummary {
                value,
                algorithm,
                t_trans: pick(|r| r.placement.t_trans),
                c_cost: pick(|r| r.placement.c_cost),
                n_iter: pick(|r| r.placement.n_iter as f64),
                fitness: pick(|r| r.fitness),
                reports,
            };
            csv.push_str(&ExperimentTable::row(plan.axis, plan.repeats, &cell));
            cells.push(cell);
        }
    }
    let table = ExperimentTable {
        axis: plan.axis,
        repeats: plan.repeats,
        base_seed: plan.base_seed,
        cells,
    };
    ExperimentOutcome {
        csv,
        result: Ok(table),
    }
}

/// Where a plan's CSV goes: its own `output` (relative paths resolved
/// against `default_dir`), or `<default_dir>/experiment.csv`.
pub fn output_path(plan: &ExperimentPlan, default_dir: &Path) -> PathBuf {
    match &plan.output {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => default_dir.join(p),
        None => default_dir.join("experiment.csv"),
    }
}
