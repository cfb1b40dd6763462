//! Discrete particle encoding: one dimension per dataset, each holding a
//! datacenter index. Private dimensions are pinned to the dataset's home.

use rand::Rng;

use crate::model::{DatacenterId, DatasetId, ProblemInstance};

/// A particle of the swarm. The pinned mask is shared by all particles and
/// lives in [`Encoding`].
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<DatacenterId>,
    pub fitness: f64,
    pub pbest: Vec<DatacenterId>,
    pub pbest_fitness: f64,
}

impl Particle {
    pub fn new(position: Vec<DatacenterId>, fitness: f64) -> Self {
        Particle {
            pbest: position.clone(),
            pbest_fitness: fitness,
            position,
            fitness,
        }
    }
}

/// Search-space description derived from an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    dc_count: usize,
    /// `Some(home)` for pinned (private) dimensions.
    pins: Vec<Option<DatacenterId>>,
    public_dims: Vec<DatasetId>,
}

impl Encoding {
    pub fn new(instance: &ProblemInstance) -> Self {
        let pins = instance
            .datasets()
            .iter()
            .map(|d| if d.private { d.home } else { None })
            .collect();
        Encoding {
            dc_count: instance.dc_count(),
            pins,
            public_dims: instance.public_dims().to_vec(),
        }
    }

    pub fn dc_count(&self) -> usize {
        self.dc_count
    }

    pub fn dims(&self) -> usize {
        self.pins.len()
    }

    pub fn public_dims(&self) -> &[DatasetId] {
        &self.public_dims
    }

    pub fn is_pinned(&self, dim: usize) -> bool {
        self.pins[dim].is_some()
    }

    pub fn pin(&self, dim: usize) -> Option<DatacenterId> {
        self.pins[dim]
    }

    pub fn encode(&self, assignment: &[DatacenterId]) -> Vec<DatacenterId> {
        assignment.to_vec()
    }

    pub fn decode(&self, position: &[DatacenterId]) -> Vec<DatacenterId> {
        position.to_vec()
    }

    /// Annular repair: unpinned components are reduced modulo the datacenter
    /// count, pinned components reset to their home.
    pub fn wrap(&self, raw: &[i64]) -> Vec<DatacenterId> {
        let n = self.dc_count as i64;
        raw.iter()
            .zip(&self.pins)
            .map(|(&x, pin)| pin.unwrap_or_else(|| x.rem_euclid(n) as usize))
            .collect()
    }

    /// In-place [`Encoding::wrap`] for positions already stored as indices.
    pub fn wrap_in_place(&self, position: &mut [DatacenterId]) {
        for (x, pin) in position.iter_mut().zip(&self.pins) {
            *x = pin.unwrap_or(*x % self.dc_count);
        }
    }

    pub fn random_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<DatacenterId> {
        self.pins
            .iter()
            .map(|pin| pin.unwrap_or_else(|| rng.random_range(0..self.dc_count)))
            .collect()
    }
}

/// Moves public datasets off overflowing edge datacenters until every edge
/// fits. The largest public dataset on an overflowing edge goes to the
/// datacenter with the most bandwidth to it that can take the dataset
/// (lowest id on ties). Cloud datacenters always accept, so this terminates
/// with a feasible position whenever private data alone fits.
pub fn repair_capacity(instance: &ProblemInstance, position: &mut [DatacenterId]) {
    let env = instance.env();
    let datasets = instance.datasets();
    let mut load = vec![0.0; env.len()];
    for d in datasets {
        load[position[d.id]] += d.size_gb;
    }
    for dc in env.datacenters.iter().filter(|dc| dc.is_edge()) {
        while !dc.capacity.fits(load[dc.id]) {
            let victim = datasets
                .iter()
                .filter(|d| !d.private && position[d.id] == dc.id)
                .fold(None, |best: Option<DatasetId>, d| match best {
                    Some(b) if datasets[b].size_gb >= d.size_gb => Some(b),
                    _ => Some(d.id),
                });
            let Some(victim) = victim else { break };
            let size = datasets[victim].size_gb;
            let target = env
                .datacenters
                .iter()
                .filter(|t| t.id != dc.id && t.capacity.fits(load[t.id] + size))
                .fold(None, |best: Option<DatacenterId>, t| match best {
                    Some(b) if env.band(dc.id, b) >= env.band(dc.id, t.id) => Some(b),
                    _ => Some(t.id),
                })
                .expect("a cloud datacenter always has room");
            position[victim] = target;
            load[dc.id] -= size;
            load[target] += size;
        }
    }
}
