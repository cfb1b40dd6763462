//! Bundled fixtures and a synthetic generator for data-sharing workflows.
//!
//! Generated workflows follow a layered fan-out/fan-in shape loosely modelled
//! on Montage mosaics: a projection layer reading raw inputs, a pairwise
//! difference layer, and one aggregation task. Each task emits one dataset.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{parse_instance, FormatError};
use crate::model::{
    validate_instance, Datacenter, DatacenterId, Dataset, DatasetId, Environment, ModelError,
    ProblemInstance, Task, Workflow,
};

const MOTIVATING_EXAMPLE: &str = include_str!("../fixtures/motivating_example.inst");

/// Names accepted by [`load_fixture`].
pub const FIXTURES: &[&str] = &["motivating_example"];

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("UnknownFixture: `{0}` (available: motivating_example)")]
    UnknownFixture(String),
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("InfeasibleSpec: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn load_fixture(name: &str) -> Result<ProblemInstance, WorkloadError> {
    match name {
        "motivating_example" => Ok(parse_instance(MOTIVATING_EXAMPLE)?),
        other => Err(WorkloadError::UnknownFixture(other.to_string())),
    }
}

/// Reference placements shipped with a fixture, as `(name, assignment)`.
pub fn fixture_placements(
    name: &str,
) -> Result<Vec<(&'static str, Vec<DatacenterId>)>, WorkloadError> {
    match name {
        "motivating_example" => {
            let scattered = vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2];
            let grouped = vec![0, 0, 1, 0, 1, 2, 1, 1, 2, 2, 2];
            Ok(vec![("scattered", scattered), ("grouped", grouped)])
        }
        other => Err(WorkloadError::UnknownFixture(other.to_string())),
    }
}

pub fn fixture_placement(name: &str, placement: &str) -> Result<Vec<DatacenterId>, WorkloadError> {
    fixture_placements(name)?
        .into_iter()
        .find(|(n, _)| *n == placement)
        .map(|(_, a)| a)
        .ok_or_else(|| WorkloadError::UnknownFixture(format!("{name}/{placement}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthProfile {
    pub cloud_cloud: f64,
    pub cloud_edge: f64,
    /// Cycled over edge pairs in lexicographic order.
    pub edge_edge: Vec<f64>,
}

impl Default for BandwidthProfile {
    fn default() -> Self {
        BandwidthProfile {
            cloud_cloud: 5.0,
            cloud_edge: 20.0,
            edge_edge: vec![100.0, 150.0, 200.0],
        }
    }
}

/// Knobs for [`generate`]. Ranges are inclusive `[lo, hi]`.
///
/// `shared_ratio` and `crossregion_ratio` are fractions of the public
/// datasets; `private_ratio` is a fraction of all datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub workflows: usize,
    pub regions: usize,
    pub tasks_per_workflow: [usize; 2],
    /// Raw (externally provided) input datasets per workflow.
    pub datasets_per_workflow: [usize; 2],
    pub dataset_size_gb: [f64; 2],
    pub private_ratio: f64,
    pub shared_ratio: f64,
    pub crossregion_ratio: f64,
    pub edge_dcs: usize,
    pub edge_capacity_gb: f64,
    pub cloud_dcs: usize,
    pub bandwidth: BandwidthProfile,
    /// Applied to edge-to-edge links only.
    pub bandwidth_multiplier: f64,
    pub cost_range: [f64; 2],
    /// Per-edge cost multiplier range; clouds use 1.
    pub edge_cost_multiplier: [f64; 2],
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            workflows: 4,
            regions: 2,
            tasks_per_workflow: [6, 10],
            datasets_per_workflow: [3, 6],
            dataset_size_gb: [1.0, 20.0],
            private_ratio: 0.2,
            shared_ratio: 0.3,
            crossregion_ratio: 0.1,
            edge_dcs: 3,
            edge_capacity_gb: 150.0,
            cloud_dcs: 2,
            bandwidth: BandwidthProfile::default(),
            bandwidth_multiplier: 1.0,
            cost_range: [0.1, 2.1],
            edge_cost_multiplier: [1.0, 2.0],
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: String| Err(WorkloadError::InvalidSpec(m));
        if self.workflows == 0 || self.regions == 0 || self.edge_dcs == 0 {
            return bad("workflow, region and edge datacenter counts must be positive".into());
        }
        if self.cloud_dcs != self.regions {
            return bad(format!(
                "need exactly one cloud datacenter per region: {} clouds, {} regions",
                self.cloud_dcs, self.regions
            ));
        }
        for (name, r) in [
            ("private", self.private_ratio),
            ("shared", self.shared_ratio),
            ("crossregion", self.crossregion_ratio),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name}_ratio {r} must be in [0, 1]"));
            }
        }
        if self.crossregion_ratio > self.shared_ratio {
            return bad("crossregion_ratio must not exceed shared_ratio".into());
        }
        let range_ok = |r: [f64; 2], min: f64| r[0] >= min && r[0] <= r[1] && r[1].is_finite();
        if self.tasks_per_workflow[0] == 0
            || self.tasks_per_workflow[0] > self.tasks_per_workflow[1]
        {
            return bad("tasks_per_workflow must be a non-empty positive range".into());
        }
        if self.datasets_per_workflow[0] == 0
            || self.datasets_per_workflow[0] > self.datasets_per_workflow[1]
        {
            return bad("datasets_per_workflow must be a non-empty positive range".into());
        }
        if !range_ok(self.dataset_size_gb, 0.0) || self.dataset_size_gb[0] <= 0.0 {
            return bad("dataset_size_gb must be a positive range".into());
        }
        if !range_ok(self.cost_range, 0.0) || !range_ok(self.edge_cost_multiplier, 0.0) {
            return bad("cost ranges must be non-negative and ordered".into());
        }
        if self.edge_capacity_gb.is_nan()
            || self.edge_capacity_gb <= 0.0
            || self.bandwidth_multiplier.is_nan()
            || self.bandwidth_multiplier <= 0.0
        {
            return bad("edge capacity and bandwidth multiplier must be positive".into());
        }
        let b = &self.bandwidth;
        let positive = |x: f64| x > 0.0;
        if !positive(b.cloud_cloud)
            || !positive(b.cloud_edge)
            || b.edge_edge.is_empty()
            || !b.edge_edge.iter().all(|&x| positive(x))
        {
            return bad("bandwidths must be positive and edge_edge non-empty".into());
        }
        Ok(())
    }
}

fn environment(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Environment {
    let mut datacenters: Vec<Datacenter> =
        (0..spec.regions).map(|r| Datacenter::cloud(r, r)).collect();
    for e in 0..spec.edge_dcs {
        let mut dc = Datacenter::edge(spec.regions + e, e % spec.regions, spec.edge_capacity_gb);
        let [lo, hi] = spec.edge_cost_multiplier;
        dc.cost_multiplier = round_to(
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            },
            100.0,
        );
        datacenters.push(dc);
    }
    let n = datacenters.len();
    let mut bandwidth = vec![vec![0.0; n]; n];
    let mut pair = 0;
    for i in 0..n {
        for j in i + 1..n {
            let b = match (datacenters[i].is_edge(), datacenters[j].is_edge()) {
                (false, false) => spec.bandwidth.cloud_cloud,
                (true, true) => {
                    let b = spec.bandwidth.edge_edge[pair % spec.bandwidth.edge_edge.len()];
                    pair += 1;
                    b * spec.bandwidth_multiplier
                }
                _ => spec.bandwidth.cloud_edge,
            };
            bandwidth[i][j] = b;
            bandwidth[j][i] = b;
        }
    }
    Environment {
        datacenters,
        bandwidth,
    }
}

fn round_to(x: f64, scale: f64) -> f64 {
    (x * scale).round() / scale
}

struct Builder<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    datasets: Vec<Dataset>,
    /// Workflow that produces or first reads each dataset.
    owner: Vec<usize>,
    tasks: Vec<Task>,
    workflows: Vec<Workflow>,
}

impl Builder<'_> {
    fn new_dataset(&mut self, owner: usize) -> DatasetId {
        let id = self.datasets.len();
        let [lo, hi] = self.spec.dataset_size_gb;
        let size = round_to(
            if hi > lo {
                self.rng.random_range(lo..=hi)
            } else {
                lo
            },
            10.0,
        )
        .max(0.1);
        let [clo, chi] = self.spec.cost_range;
        let cost = round_to(
            if chi > clo {
                self.rng.random_range(clo..=chi)
            } else {
                clo
            },
            100.0,
        );
        self.datasets.push(Dataset::public(id, size, cost));
        self.owner.push(owner);
        id
    }

    fn new_task(&mut self, wf: usize, inputs: Vec<DatasetId>) -> usize {
        let id = self.tasks.len();
        let out = self.new_dataset(wf);
        self.tasks.push(Task {
            id,
            workflow: wf,
            inputs,
            outputs: vec![out],
            placed_at: None,
        });
        id
    }

    fn workflow(&mut self, wf: usize) {
        let [tlo, thi] = self.spec.tasks_per_workflow;
        let n = self.rng.random_range(tlo..=thi);
        let [rlo, rhi] = self.spec.datasets_per_workflow;
        let raw_count = self.rng.random_range(rlo..=rhi);
        let raw: Vec<DatasetId> = (0..raw_count).map(|_| self.new_dataset(wf)).collect();

        let mut edges = Vec::new();
        let mut ids = Vec::new();
        let out = |b: &Self, t: usize| b.tasks[t].outputs[0];

        // projection layer
        let width = if n == 1 { 1 } else { ((n - 1) / 2).max(1) };
        let first: Vec<usize> = (0..width)
            .map(|i| self.new_task(wf, vec![raw[i % raw.len()]]))
            .collect();
        ids.extend(&first);
        // side inputs for any raw datasets beyond the projection width
        for &d in raw.iter().skip(width) {
            let t = first[self.rng.random_range(0..first.len())];
            self.tasks[t].inputs.push(d);
        }
        if n == 1 {
            self.workflows.push(Workflow {
                id: wf,
                region: wf % self.spec.regions,
                tasks: ids,
                edges,
            });
            return;
        }
        // pairwise layer
        let middle_count = n - 1 - width;
        let mut middle = Vec::new();
        for _ in 0..middle_count {
            let mut parents: Vec<usize> = first.clone();
            parents.shuffle(&mut self.rng);
            parents.truncate(2);
            parents.sort_unstable();
            let inputs = parents.iter().map(|&p| out(self, p)).collect();
            let t = self.new_task(wf, inputs);
            edges.extend(parents.iter().map(|&p| (p, t)));
            middle.push(t);
        }
        ids.extend(&middle);
        // aggregation: every middle task plus projections nobody consumed
        let consumed: BTreeSet<usize> = edges.iter().map(|&(p, _)| p).collect();
        let mut parents = middle.clone();
        parents.extend(first.iter().filter(|t| !consumed.contains(t)));
        parents.sort_unstable();
        let inputs = parents.iter().map(|&p| out(self, p)).collect();
        let agg = self.new_task(wf, inputs);
        edges.extend(parents.iter().map(|&p| (p, agg)));
        ids.push(agg);

        self.workflows.push(Workflow {
            id: wf,
            region: wf % self.spec.regions,
            tasks: ids,
            edges,
        });
    }

    /// Adds `d` as an input of a random task in workflow `wf`.
    fn share_with(&mut self, d: DatasetId, wf: usize) {
        let tasks = &self.workflows[wf].tasks;
        let t = tasks[self.rng.random_range(0..tasks.len())];
        self.tasks[t].inputs.push(d);
    }
}

/// Builds a random problem instance from `spec`. Deterministic in `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<ProblemInstance, WorkloadError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let env = environment(spec, &mut rng);
    let mut b = Builder {
        spec,
        rng,
        datasets: Vec::new(),
        owner: Vec::new(),
        tasks: Vec::new(),
        workflows: Vec::new(),
    };
    for wf in 0..spec.workflows {
        b.workflow(wf);
    }

    let total = b.datasets.len();
    let mut order: Vec<DatasetId> = (0..total).collect();
    order.shuffle(&mut b.rng);
    let n_private = (spec.private_ratio * total as f64).round() as usize;
    let (private, public) = order.split_at(n_private);
    let public = public.to_vec();

    let region_of = |wf: usize| wf % spec.regions;
    let mut per_region = vec![Vec::new(); spec.regions];
    for wf in 0..spec.workflows {
        per_region[region_of(wf)].push(wf);
    }

    let n_shared = (spec.shared_ratio * public.len() as f64).round() as usize;
    let n_cross = ((spec.crossregion_ratio * public.len() as f64).round() as usize).min(n_shared);
    if n_cross > 0 && per_region.iter().filter(|r| !r.is_empty()).count() < 2 {
        return Err(WorkloadError::InvalidSpec(
            "cross-region sharing needs workflows in two regions".into(),
        ));
    }
    let mut cross = Vec::new();
    let mut local = Vec::new();
    for &d in &public {
        if cross.len() < n_cross {
            cross.push(d);
        } else if local.len() < n_shared - n_cross && per_region[region_of(b.owner[d])].len() >= 2 {
            local.push(d);
        }
    }
    if local.len() < n_shared - n_cross {
        return Err(WorkloadError::InvalidSpec(format!(
            "only {} datasets can be shared within a region, {} requested",
            local.len(),
            n_shared - n_cross
        )));
    }
    for &d in &cross {
        let home_region = region_of(b.owner[d]);
        let others: Vec<usize> = (0..spec.workflows)
            .filter(|&w| region_of(w) != home_region)
            .collect();
        let w = others[b.rng.random_range(0..others.len())];
        b.share_with(d, w);
        b.datasets[d].shared = true;
        b.datasets[d].cross_region = true;
    }
    for &d in &local {
        let owner = b.owner[d];
        let others: Vec<usize> = per_region[region_of(owner)]
            .iter()
            .copied()
            .filter(|&w| w != owner)
            .collect();
        let w = others[b.rng.random_range(0..others.len())];
        b.share_with(d, w);
        b.datasets[d].shared = true;
    }

    home_private(&env, &mut b, private)?;
    Ok(validate_instance(env, b.workflows, b.tasks, b.datasets)?)
}

/// Homes private datasets on uniformly chosen edges of their workflow's
/// region, falling back to first-fit decreasing when that overflows.
fn home_private(
    env: &Environment,
    b: &mut Builder<'_>,
    private: &[DatasetId],
) -> Result<(), WorkloadError> {
    let edges: Vec<&Datacenter> = env.datacenters.iter().filter(|dc| dc.is_edge()).collect();
    let candidates = |region: usize| -> Vec<DatacenterId> {
        let local: Vec<_> = edges
            .iter()
            .filter(|dc| dc.region == region)
            .map(|dc| dc.id)
            .collect();
        if local.is_empty() {
            edges.iter().map(|dc| dc.id).collect()
        } else {
            local
        }
    };
    let mut load = vec![0.0; env.len()];
    for &d in private {
        let c = candidates(b.owner[d] % b.spec.regions);
        let home = c[b.rng.random_range(0..c.len())];
        b.datasets[d].private = true;
        b.datasets[d].home = Some(home);
        load[home] += b.datasets[d].size_gb;
    }
    if edges.iter().all(|dc| dc.capacity.fits(load[dc.id])) {
        return Ok(());
    }

    let mut by_size = private.to_vec();
    by_size.sort_by(|&x, &y| {
        b.datasets[y]
            .size_gb
            .total_cmp(&b.datasets[x].size_gb)
            .then(x.cmp(&y))
    });
    load.iter_mut().for_each(|l| *l = 0.0);
    for d in by_size {
        let size = b.datasets[d].size_gb;
        let region = b.owner[d] % b.spec.regions;
        let mut order: Vec<DatacenterId> = candidates(region);
        let rest: Vec<DatacenterId> = edges
            .iter()
            .map(|dc| dc.id)
            .filter(|id| !order.contains(id))
            .collect();
        order.extend(rest);
        let home = order
            .into_iter()
            .find(|&e| env.datacenters[e].capacity.fits(load[e] + size))
            .ok_or_else(|| {
                WorkloadError::InfeasibleSpec(format!(
                    "private dataset {d} ({size} GB) does not fit on any edge"
                ))
            })?;
        b.datasets[d].home = Some(home);
        load[home] += size;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::write_instance;
    use crate::model::shared_dataset_partition;

    #[test]
    fn unknown_fixture() {
        assert!(matches!(
            load_fixture("nope"),
            Err(WorkloadError::UnknownFixture(_))
        ));
    }

    #[test]
    fn default_spec_generates_valid_instance() {
        let inst = generate(&GeneratorSpec::default()).unwrap();
        assert_eq!(inst.env().cloud_ids().count(), 2);
        assert_eq!(inst.env().edge_ids().count(), 3);
        assert!(inst.tasks().len() >= 4 * 6);
    }

    #[test]
    fn default_bandwidth_profile() {
        let inst = generate(&GeneratorSpec::default()).unwrap();
        let expected = [
            [0.0, 5.0, 20.0, 20.0, 20.0],
            [5.0, 0.0, 20.0, 20.0, 20.0],
            [20.0, 20.0, 0.0, 100.0, 150.0],
            [20.0, 20.0, 100.0, 0.0, 200.0],
            [20.0, 20.0, 150.0, 200.0, 0.0],
        ];
        for (row, exp) in inst.env().bandwidth.iter().zip(expected) {
            assert_eq!(row.as_slice(), exp.as_slice());
        }
    }

    #[test]
    fn multiplier_scales_edge_links_only() {
        let spec = GeneratorSpec {
            bandwidth_multiplier: 3.0,
            ..Default::default()
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.env().band(2, 3), 300.0);
        assert_eq!(inst.env().band(0, 2), 20.0);
        assert_eq!(inst.env().band(0, 1), 5.0);
    }

    #[test]
    fn zero_ratios_give_public_unshared() {
        let spec = GeneratorSpec {
            private_ratio: 0.0,
            shared_ratio: 0.0,
            crossregion_ratio: 0.0,
            ..Default::default()
        };
        let inst = generate(&spec).unwrap();
        let part = shared_dataset_partition(&inst);
        assert_eq!(part.public_unshared.len(), inst.datasets().len());
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = GeneratorSpec {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(
            write_instance(&generate(&spec).unwrap()),
            write_instance(&generate(&spec).unwrap())
        );
        let other = GeneratorSpec {
            seed: 43,
            ..Default::default()
        };
        assert_ne!(
            write_instance(&generate(&spec).unwrap()),
            write_instance(&generate(&other).unwrap())
        );
    }

    #[test]
    fn shared_flags_match_references() {
        let inst = generate(&GeneratorSpec {
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        for d in inst.datasets() {
            let wfs: BTreeSet<usize> = inst
                .tasks()
                .iter()
                .filter(|t| t.inputs.contains(&d.id) || t.outputs.contains(&d.id))
                .map(|t| t.workflow)
                .collect();
            let regions: BTreeSet<usize> =
                wfs.iter().map(|&w| inst.workflows()[w].region).collect();
            if d.shared {
                assert!(
                    wfs.len() >= 2,
                    "dataset {} flagged shared but used by {wfs:?}",
                    d.id
                );
            }
            if d.cross_region {
                assert!(regions.len() >= 2);
            }
        }
    }

    #[test]
    fn oversized_private_data_is_infeasible() {
        let spec = GeneratorSpec {
            private_ratio: 1.0,
            shared_ratio: 0.0,
            crossregion_ratio: 0.0,
            edge_capacity_gb: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            generate(&spec),
            Err(WorkloadError::InfeasibleSpec(_))
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = [
            GeneratorSpec {
                crossregion_ratio: 0.5,
                shared_ratio: 0.2,
                ..Default::default()
            },
            GeneratorSpec {
                cloud_dcs: 1,
                ..Default::default()
            },
            GeneratorSpec {
                private_ratio: 1.5,
                ..Default::default()
            },
            GeneratorSpec {
                workflows: 0,
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(
                matches!(generate(&spec), Err(WorkloadError::InvalidSpec(_))),
                "{spec:?}"
            );
        }
    }
}
