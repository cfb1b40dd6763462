#![allow(dead_code)]

use edgeplace::model::ProblemInstance;
use edgeplace::workloads::{generate, GeneratorSpec};

/// Two workflows in one region: 1 cloud and 2 or 3 edges, a handful of
/// public datasets. Small enough to enumerate.
pub fn small_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        workflows: 2,
        regions: 1,
        cloud_dcs: 1,
        edge_dcs: 2 + (seed % 2) as usize,
        tasks_per_workflow: [3, 4],
        datasets_per_workflow: [1, 2],
        dataset_size_gb: [1.0, 20.0],
        shared_ratio: 0.4,
        crossregion_ratio: 0.0,
        seed,
        ..GeneratorSpec::default()
    }
}

/// [`small_spec`] with 40 GB edges, so capacity repair is active.
pub fn tight_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        edge_capacity_gb: 40.0,
        ..small_spec(seed)
    }
}

/// The first `count` generated instances with between 3 and `max_public`
/// public datasets, scanning seeds upward from 0.
pub fn small_instances(
    count: usize,
    max_public: usize,
    spec: impl Fn(u64) -> GeneratorSpec,
) -> Vec<ProblemInstance> {
    (0..10_000u64)
        .filter_map(|s| generate(&spec(s)).ok())
        .filter(|i| (3..=max_public).contains(&i.public_dims().len()) && i.dc_count() <= 4)
        .take(count)
        .collect()
}

/// Generator defaults: 3 edges at 150 GB, 2 clouds, 4 workflows.
pub fn default_profile(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        ..GeneratorSpec::default()
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
