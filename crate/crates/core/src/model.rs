//! Domain types for the edge-cloud environment and data-sharing workflows.
//!
//! A [`ProblemInstance`] can only be obtained through [`validate_instance`],
//! so every instance handed to the objective and the optimizers already
//! satisfies the structural invariants (acyclic workflows, private data
//! homed on edge datacenters, one cloud per region, and so on).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type DatacenterId = usize;
pub type DatasetId = usize;
pub type TaskId = usize;
pub type WorkflowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DcType {
    Cloud = 0,
    Edge = 1,
}

impl fmt::Display for DcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcType::Cloud => f.write_str("cloud"),
            DcType::Edge => f.write_str("edge"),
        }
    }
}

/// Storage capacity of a datacenter. Cloud datacenters are unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Unbounded,
    Gb(f64),
}

impl Capacity {
    pub fn fits(&self, load_gb: f64) -> bool {
        match *self {
            Capacity::Unbounded => true,
            Capacity::Gb(cap) => load_gb <= cap + CAPACITY_EPS,
        }
    }

    /// GB above capacity, zero when the load fits.
    pub fn overflow(&self, load_gb: f64) -> f64 {
        match *self {
            Capacity::Unbounded => 0.0,
            Capacity::Gb(cap) if load_gb > cap + CAPACITY_EPS => load_gb - cap,
            Capacity::Gb(_) => 0.0,
        }
    }

    pub fn as_gb(&self) -> Option<f64> {
        match *self {
            Capacity::Unbounded => None,
            Capacity::Gb(cap) => Some(cap),
        }
    }
}

/// Tolerance for summed dataset sizes against a capacity limit.
pub const CAPACITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Datacenter {
    pub id: DatacenterId,
    pub dc_type: DcType,
    pub capacity: Capacity,
    pub region: usize,
    /// Multiplier applied to every dataset's base placement cost here.
    pub cost_multiplier: f64,
}

impl Datacenter {
    pub fn cloud(id: DatacenterId, region: usize) -> Self {
        Datacenter {
            id,
            dc_type: DcType::Cloud,
            capacity: Capacity::Unbounded,
            region,
            cost_multiplier: 1.0,
        }
    }

    pub fn edge(id: DatacenterId, region: usize, capacity_gb: f64) -> Self {
        Datacenter {
            id,
            dc_type: DcType::Edge,
            capacity: Capacity::Gb(capacity_gb),
            region,
            cost_multiplier: 1.0,
        }
    }

    pub fn is_edge(&self) -> bool {
        self.dc_type == DcType::Edge
    }
}

/// Datacenters plus the symmetric bandwidth matrix (MB/s) between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub datacenters: Vec<Datacenter>,
    /// Row-major `n x n`; the diagonal is unused.
    pub bandwidth: Vec<Vec<f64>>,
}

impl Environment {
    pub fn len(&self) -> usize {
        self.datacenters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datacenters.is_empty()
    }

    pub fn band(&self, from: DatacenterId, to: DatacenterId) -> f64 {
        self.bandwidth[from][to]
    }

    pub fn region_count(&self) -> usize {
        self.datacenters
            .iter()
            .map(|dc| dc.region + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = DatacenterId> + '_ {
        self.datacenters
            .iter()
            .filter(|dc| dc.is_edge())
            .map(|dc| dc.id)
    }

    pub fn cloud_ids(&self) -> impl Iterator<Item = DatacenterId> + '_ {
        self.datacenters
            .iter()
            .filter(|dc| !dc.is_edge())
            .map(|dc| dc.id)
    }

    /// Multiplies every off-diagonal bandwidth by `factor`.
    pub fn scale_bandwidth(&mut self, factor: f64) {
        for (i, row) in self.bandwidth.iter_mut().enumerate() {
            for (j, b) in row.iter_mut().enumerate() {
                if i != j {
                    *b *= factor;
                }
            }
        }
    }

    /// Multiplies bandwidth between pairs of edge datacenters by `factor`.
    pub fn scale_edge_bandwidth(&mut self, factor: f64) {
        let edge: Vec<bool> = self.datacenters.iter().map(Datacenter::is_edge).collect();
        for (i, row) in self.bandwidth.iter_mut().enumerate() {
            for (j, b) in row.iter_mut().enumerate() {
                if i != j && edge[i] && edge[j] {
                    *b *= factor;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: DatasetId,
    pub size_gb: f64,
    /// Private: may only live at `home`.
    pub private: bool,
    /// Shared across workflows.
    pub shared: bool,
    /// Shared across regions. Implies `shared`.
    pub cross_region: bool,
    pub home: Option<DatacenterId>,
    /// Base placement cost in dollars, scaled by the datacenter multiplier.
    pub cost: f64,
}

impl Dataset {
    pub fn public(id: DatasetId, size_gb: f64, cost: f64) -> Self {
        Dataset {
            id,
            size_gb,
            private: false,
            shared: false,
            cross_region: false,
            home: None,
            cost,
        }
    }

    pub fn private(id: DatasetId, size_gb: f64, cost: f64, home: DatacenterId) -> Self {
        Dataset {
            id,
            size_gb,
            private: true,
            shared: false,
            cross_region: false,
            home: Some(home),
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub workflow: WorkflowId,
    pub inputs: Vec<DatasetId>,
    pub outputs: Vec<DatasetId>,
    pub placed_at: Option<DatacenterId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    pub id: WorkflowId,
    pub region: usize,
    pub tasks: Vec<TaskId>,
    /// Precedence pairs `(before, after)`.
    pub edges: Vec<(TaskId, TaskId)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("CyclicWorkflow: workflow {workflow} has a dependency cycle through task {task}")]
    CyclicWorkflow { workflow: WorkflowId, task: TaskId },
    #[error("PrivateWithoutHome: private dataset {dataset} has no home datacenter")]
    PrivateWithoutHome { dataset: DatasetId },
    #[error(
        "PrivateHomedOnCloud: private dataset {dataset} is homed on cloud datacenter {datacenter}"
    )]
    PrivateHomedOnCloud {
        dataset: DatasetId,
        datacenter: DatacenterId,
    },
    #[error("DanglingReference: {what}")]
    DanglingReference { what: String },
    #[error("InvalidDatacenter: datacenter {datacenter}: {reason}")]
    InvalidDatacenter {
        datacenter: DatacenterId,
        reason: String,
    },
    #[error("InvalidBandwidth: link {from}-{to}: {reason}")]
    InvalidBandwidth {
        from: DatacenterId,
        to: DatacenterId,
        reason: String,
    },
    #[error("InvalidEnvironment: {0}")]
    InvalidEnvironment(String),
    #[error("InvalidDataset: dataset {dataset}: {reason}")]
    InvalidDataset { dataset: DatasetId, reason: String },
    #[error("InvalidTask: task {task}: {reason}")]
    InvalidTask { task: TaskId, reason: String },
    #[error("PrivateOverflow: private datasets alone exceed the capacity of edge datacenter {datacenter} ({load_gb} GB)")]
    PrivateOverflow {
        datacenter: DatacenterId,
        load_gb: f64,
    },
}

/// A validated placement problem. Immutable; construct with [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    env: Environment,
    datasets: Vec<Dataset>,
    tasks: Vec<Task>,
    workflows: Vec<Workflow>,
    public_dims: Vec<DatasetId>,
}

impl ProblemInstance {
    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn workflows(&self) -> &[Workflow] {
        &self.workflows
    }

    pub fn dc_count(&self) -> usize {
        self.env.len()
    }

    /// Ids of public datasets in ascending order; these are the free
    /// dimensions of the search space.
    pub fn public_dims(&self) -> &[DatasetId] {
        &self.public_dims
    }

    /// Placement cost of dataset `d` at datacenter `dc`.
    pub fn cost_rate(&self, d: DatasetId, dc: DatacenterId) -> f64 {
        self.datasets[d].cost * self.env.datacenters[dc].cost_multiplier
    }

    /// Every private dataset at home, every public dataset at `dc`.
    pub fn uniform_assignment(&self, dc: DatacenterId) -> Vec<DatacenterId> {
        self.datasets
            .iter()
            .map(|d| d.home.filter(|_| d.private).unwrap_or(dc))
            .collect()
    }

    /// Splits the instance back into its parts, e.g. to edit and revalidate.
    pub fn into_parts(self) -> (Environment, Vec<Workflow>, Vec<Task>, Vec<Dataset>) {
        (self.env, self.workflows, self.tasks, self.datasets)
    }

    pub fn with_environment(&self, env: Environment) -> Result<ProblemInstance, ModelError> {
        validate_instance(
            env,
            self.workflows.clone(),
            self.tasks.clone(),
            self.datasets.clone(),
        )
    }
}

/// Checks every structural invariant and assembles a [`ProblemInstance`].
pub fn validate_instance(
    env: Environment,
    workflows: Vec<Workflow>,
    tasks: Vec<Task>,
    datasets: Vec<Dataset>,
) -> Result<ProblemInstance, ModelError> {
    validate_environment(&env)?;
    validate_datasets(&env, &datasets)?;
    validate_tasks(&env, &workflows, &tasks, &datasets)?;
    for wf in &workflows {
        check_acyclic(wf)?;
    }
    validate_private_load(&env, &datasets)?;

    let public_dims = datasets
        .iter()
        .filter(|d| !d.private)
        .map(|d| d.id)
        .collect();
    Ok(ProblemInstance {
        env,
        datasets,
        tasks,
        workflows,
        public_dims,
    })
}

fn validate_environment(env: &Environment) -> Result<(), ModelError> {
    let n = env.datacenters.len();
    for (i, dc) in env.datacenters.iter().enumerate() {
        if dc.id != i {
            return Err(ModelError::InvalidDatacenter {
                datacenter: dc.id,
                reason: format!("expected id {i}"),
            });
        }
        match (dc.dc_type, dc.capacity) {
            (DcType::Cloud, Capacity::Gb(_)) => {
                return Err(ModelError::InvalidDatacenter {
                    datacenter: i,
                    reason: "cloud capacity must be unbounded".into(),
                })
            }
            (DcType::Edge, Capacity::Unbounded) => {
                return Err(ModelError::InvalidDatacenter {
                    datacenter: i,
                    reason: "edge capacity must be finite".into(),
                })
            }
            (DcType::Edge, Capacity::Gb(cap)) if !(cap > 0.0 && cap.is_finite()) => {
                return Err(ModelError::InvalidDatacenter {
                    datacenter: i,
                    reason: format!("capacity {cap} must be > 0"),
                })
            }
            _ => {}
        }
        if !(dc.cost_multiplier >= 0.0 && dc.cost_multiplier.is_finite()) {
            return Err(ModelError::InvalidDatacenter {
                datacenter: i,
                reason: format!(
                    "cost multiplier {} must be finite and >= 0",
                    dc.cost_multiplier
                ),
            });
        }
    }
    if !env.datacenters.iter().any(|dc| dc.is_edge())
        || !env.datacenters.iter().any(|dc| !dc.is_edge())
    {
        return Err(ModelError::InvalidEnvironment(
            "need at least one cloud and one edge datacenter".into(),
        ));
    }
    let regions = env.region_count();
    for r in 0..regions {
        let clouds = env
            .datacenters
            .iter()
            .filter(|dc| dc.region == r && !dc.is_edge())
            .count();
        if clouds != 1 {
            return Err(ModelError::InvalidEnvironment(format!(
                "region {r} has {clouds} cloud datacenters, expected 1"
            )));
        }
    }
    if env.bandwidth.len() != n || env.bandwidth.iter().any(|row| row.len() != n) {
        return Err(ModelError::InvalidEnvironment(format!(
            "bandwidth matrix must be {n}x{n}"
        )));
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let b = env.bandwidth[i][j];
            if !(b > 0.0 && b.is_finite()) {
                return Err(ModelError::InvalidBandwidth {
                    from: i,
                    to: j,
                    reason: format!("{b} must be > 0"),
                });
            }
            if b != env.bandwidth[j][i] {
                return Err(ModelError::InvalidBandwidth {
                    from: i,
                    to: j,
                    reason: "matrix is not symmetric".into(),
                });
            }
        }
    }
    Ok(())
}

fn validate_datasets(env: &Environment, datasets: &[Dataset]) -> Result<(), ModelError> {
    for (i, d) in datasets.iter().enumerate() {
        let bad = |reason: &str| ModelError::InvalidDataset {
            dataset: d.id,
            reason: reason.to_string(),
        };
        if d.id != i {
            return Err(bad(&format!("expected id {i}")));
        }
        if !(d.size_gb > 0.0 && d.size_gb.is_finite()) {
            return Err(bad("size must be > 0"));
        }
        if !(d.cost >= 0.0 && d.cost.is_finite()) {
            return Err(bad("cost must be finite and >= 0"));
        }
        if d.cross_region && !d.shared {
            return Err(bad("cross-region datasets must also be shared"));
        }
        match (d.private, d.home) {
            (true, None) => return Err(ModelError::PrivateWithoutHome { dataset: d.id }),
            (_, Some(h)) if h >= env.len() => {
                return Err(ModelError::DanglingReference {
                    what: format!("dataset {} home datacenter {h}", d.id),
                })
            }
            (true, Some(h)) if !env.datacenters[h].is_edge() => {
                return Err(ModelError::PrivateHomedOnCloud {
                    dataset: d.id,
                    datacenter: h,
                })
            }
            _ => {}
        }
    }
    Ok(())
}

fn validate_tasks(
    env: &Environment,
    workflows: &[Workflow],
    tasks: &[Task],
    datasets: &[Dataset],
) -> Result<(), ModelError> {
    let regions = env.region_count();
    let mut owner: Vec<Option<WorkflowId>> = vec![None; tasks.len()];
    for (i, wf) in workflows.iter().enumerate() {
        if wf.id != i {
            return Err(ModelError::DanglingReference {
                what: format!("workflow {} listed at position {i}", wf.id),
            });
        }
        if wf.region >= regions {
            return Err(ModelError::DanglingReference {
                what: format!("workflow {} region {}", wf.id, wf.region),
            });
        }
        for &t in &wf.tasks {
            if t >= tasks.len() {
                return Err(ModelError::DanglingReference {
                    what: format!("workflow {} task {t}", wf.id),
                });
            }
            if let Some(other) = owner[t] {
                return Err(ModelError::InvalidTask {
                    task: t,
                    reason: format!("belongs to workflows {other} and {}", wf.id),
                });
            }
            owner[t] = Some(wf.id);
        }
        for &(a, b) in &wf.edges {
            for t in [a, b] {
                if !wf.tasks.contains(&t) {
                    return Err(ModelError::DanglingReference {
                        what: format!("workflow {} edge {a}->{b}", wf.id),
                    });
                }
            }
        }
    }
    for (i, task) in tasks.iter().enumerate() {
        if task.id != i {
            return Err(ModelError::InvalidTask {
                task: task.id,
                reason: format!("expected id {i}"),
            });
        }
        if owner[i] != Some(task.workflow) {
            return Err(ModelError::InvalidTask {
                task: i,
                reason: format!(
                    "declares workflow {} but is not listed there",
                    task.workflow
                ),
            });
        }
        for &d in task.inputs.iter().chain(&task.outputs) {
            if d >= datasets.len() {
                return Err(ModelError::DanglingReference {
                    what: format!("task {i} dataset {d}"),
                });
            }
        }
        if let Some(dc) = task.placed_at {
            if dc >= env.len() {
                return Err(ModelError::DanglingReference {
                    what: format!("task {i} placed at datacenter {dc}"),
                });
            }
        }
        let inputs: BTreeSet<_> = task.inputs.iter().collect();
        if let Some(d) = task.outputs.iter().find(|d| inputs.contains(d)) {
            return Err(ModelError::InvalidTask {
                task: i,
                reason: format!("dataset {d} is both input and output"),
            });
        }
    }
    Ok(())
}

/// Kahn's algorithm over the workflow's precedence edges.
fn check_acyclic(wf: &Workflow) -> Result<(), ModelError> {
    let index = |t: TaskId| {
        wf.tasks
            .iter()
            .position(|&x| x == t)
            .expect("edge endpoints validated")
    };
    let n = wf.tasks.len();
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &wf.edges {
        if a == b {
            return Err(ModelError::CyclicWorkflow {
                workflow: wf.id,
                task: a,
            });
        }
        let (ia, ib) = (index(a), index(b));
        succ[ia].push(ib);
        indegree[ib] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    if seen < n {
        let stuck = (0..n)
            .find(|&i| indegree[i] > 0)
            .expect("some task remains");
        return Err(ModelError::CyclicWorkflow {
            workflow: wf.id,
            task: wf.tasks[stuck],
        });
    }
    Ok(())
}

fn validate_private_load(env: &Environment, datasets: &[Dataset]) -> Result<(), ModelError> {
    let mut load = vec![0.0; env.len()];
    for d in datasets.iter().filter(|d| d.private) {
        load[d.home.expect("checked")] += d.size_gb;
    }
    for dc in &env.datacenters {
        if !dc.capacity.fits(load[dc.id]) {
            return Err(ModelError::PrivateOverflow {
                datacenter: dc.id,
                load_gb: load[dc.id],
            });
        }
    }
    Ok(())
}

/// Datasets grouped by their privacy and sharing flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetPartition {
    pub private: Vec<DatasetId>,
    pub public_unshared: Vec<DatasetId>,
    pub public_shared_local: Vec<DatasetId>,
    pub public_shared_crossregion: Vec<DatasetId>,
}

impl DatasetPartition {
    pub fn total(&self) -> usize {
        self.private.len()
            + self.public_unshared.len()
            + self.public_shared_local.len()
            + self.public_shared_crossregion.len()
    }
}

pub fn shared_dataset_partition(instance: &ProblemInstance) -> DatasetPartition {
    let mut part = DatasetPartition::default();
    for d in instance.datasets() {
        let bucket = match (d.private, d.shared, d.cross_region) {
            (true, _, _) => &mut part.private,
            (false, false, _) => &mut part.public_unshared,
            (false, true, false) => &mut part.public_shared_local,
            (false, true, true) => &mut part.public_shared_crossregion,
        };
        bucket.push(d.id);
    }
    part
}
