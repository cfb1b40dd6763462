//! Placement of shared datasets across edge and cloud datacenters for
//! multi-workflow environments.
//!
//! The crate models workflows, datasets and datacenters, scores a placement
//! by transfer time and storage cost, and searches for good placements with
//! a hybrid discrete swarm optimizer and several baselines.

pub mod encoding;
pub mod format;
pub mod harness;
pub mod model;
pub mod objective;
pub mod optimizers;
pub mod oracle;
pub mod strategy;
pub mod workloads;

pub use model::{ModelError, ProblemInstance};
pub use objective::{FitnessWeights, Objective};
pub use optimizers::{Algorithm, OptimizerConfig, RunResult};
pub use strategy::{run_strategy, StrategyReport};
