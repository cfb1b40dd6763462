//! Position operators. All of them leave pinned dimensions at home.

use rand::Rng;

use crate::encoding::Encoding;
use crate::model::DatacenterId;

/// Discrete differential mutation `x + F * (a - b)`.
///
/// The difference `a - b` is the set of dimensions where the peers
/// disagree; each of them is copied from `a` with probability `f`.
pub fn mutate<R: Rng + ?Sized>(
    enc: &Encoding,
    x: &[DatacenterId],
    a: &[DatacenterId],
    b: &[DatacenterId],
    f: f64,
    rng: &mut R,
) -> Vec<DatacenterId> {
    let mut u = x.to_vec();
    for &k in enc.public_dims() {
        if a[k] != b[k] && rng.random::<f64>() < f {
            u[k] = a[k];
        }
    }
    enc.wrap_in_place(&mut u);
    u
}

/// Uniform crossover: each dimension comes from `guide` with probability
/// `prob`, otherwise from `x`.
pub fn crossover<R: Rng + ?Sized>(
    enc: &Encoding,
    guide: &[DatacenterId],
    x: &[DatacenterId],
    prob: f64,
    rng: &mut R,
) -> Vec<DatacenterId> {
    let mut y = x.to_vec();
    for &k in enc.public_dims() {
        if rng.random::<f64>() < prob {
            y[k] = guide[k];
        }
    }
    enc.wrap_in_place(&mut y);
    y
}

/// Two-point crossover: picks two cut points over the public dimensions and
/// copies the segment between them from `guide`.
pub fn segment_crossover<R: Rng + ?Sized>(
    enc: &Encoding,
    guide: &[DatacenterId],
    x: &[DatacenterId],
    rng: &mut R,
) -> Vec<DatacenterId> {
    let mut y = x.to_vec();
    let dims = enc.public_dims();
    if !dims.is_empty() {
        let i = rng.random_range(0..dims.len());
        let j = rng.random_range(0..dims.len());
        for &k in &dims[i.min(j)..=i.max(j)] {
            y[k] = guide[k];
        }
    }
    enc.wrap_in_place(&mut y);
    y
}

/// With probability `rate`, resets one random public dimension to a
/// uniformly drawn datacenter.
pub fn point_mutation<R: Rng + ?Sized>(
    enc: &Encoding,
    x: &mut [DatacenterId],
    rate: f64,
    rng: &mut R,
) {
    let dims = enc.public_dims();
    if !dims.is_empty() && rng.random::<f64>() < rate {
        let k = dims[rng.random_range(0..dims.len())];
        x[k] = rng.random_range(0..enc.dc_count());
    }
}

/// Replacement rule: the candidate `w` survives only when its fitness is
/// strictly below `threshold` (the swarm best); ties keep `prev`.
pub fn select<'a>(
    w: &'a [DatacenterId],
    w_fitness: f64,
    prev: &'a [DatacenterId],
    threshold: f64,
) -> &'a [DatacenterId] {
    if w_fitness < threshold {
        w
    } else {
        prev
    }
}

/// Two distinct peer indices, both different from `i`. Needs `n >= 3`.
pub fn pick_peers<R: Rng + ?Sized>(n: usize, i: usize, rng: &mut R) -> (usize, usize) {
    debug_assert!(n >= 3 && i < n);
    let mut a = rng.random_range(0..n - 1);
    if a >= i {
        a += 1;
    }
    let (lo, hi) = (i.min(a), i.max(a));
    let mut b = rng.random_range(0..n - 2);
    if b >= lo {
        b += 1;
    }
    if b >= hi {
        b += 1;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        validate_instance, Datacenter, Dataset, Environment, ProblemInstance, Task, Workflow,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `n` public datasets and one private dataset (last dimension, homed at 1)
    /// over a cloud and two edges.
    fn instance(n: usize) -> ProblemInstance {
        let env = Environment {
            datacenters: vec![
                Datacenter::cloud(0, 0),
                Datacenter::edge(1, 0, 1e6),
                Datacenter::edge(2, 0, 1e6),
            ],
            bandwidth: vec![
                vec![0.0, 10.0, 20.0],
                vec![10.0, 0.0, 150.0],
                vec![20.0, 150.0, 0.0],
            ],
        };
        let mut ds: Vec<Dataset> = (0..n).map(|i| Dataset::public(i, 1.0, 0.0)).collect();
        ds.push(Dataset::private(n, 1.0, 0.0, 1));
        let tasks = vec![Task {
            id: 0,
            workflow: 0,
            inputs: (0..=n).collect(),
            outputs: vec![],
            placed_at: None,
        }];
        let wfs = vec![Workflow {
            id: 0,
            region: 0,
            tasks: vec![0],
            edges: vec![],
        }];
        validate_instance(env, wfs, tasks, ds).unwrap()
    }

    #[test]
    fn equal_peers_leave_x_unchanged() {
        let enc = Encoding::new(&instance(4));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![0, 1, 2, 0, 1];
        let a = vec![2, 2, 2, 2, 1];
        assert_eq!(mutate(&enc, &x, &a, &a, 1.0, &mut rng), x);
    }

    #[test]
    fn full_scale_adopts_every_difference() {
        let enc = Encoding::new(&instance(4));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = vec![0, 0, 0, 0, 1];
        let a = vec![1, 2, 1, 2, 1];
        let b = vec![1, 0, 0, 2, 1];
        assert_eq!(mutate(&enc, &x, &a, &b, 1.0, &mut rng), vec![0, 2, 1, 0, 1]);
    }

    #[test]
    fn mutation_rate_matches_scale_factor() {
        // 20 differing dimensions, F = 0.15: 3 adopted on average.
        let enc = Encoding::new(&instance(20));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = vec![0; 21];
        let a = vec![1; 21];
        let b: Vec<usize> = (0..21).map(|k| if k < 20 { 2 } else { 1 }).collect();
        let trials = 10_000;
        let adopted: usize = (0..trials)
            .map(|_| {
                mutate(&enc, &x, &a, &b, 0.15, &mut rng)
                    .iter()
                    .take(20)
                    .filter(|&&v| v == 1)
                    .count()
            })
            .sum();
        let mean = adopted as f64 / trials as f64;
        assert!((mean - 3.0).abs() <= 0.3, "mean adopted {mean}");
    }

    #[test]
    fn crossover_extremes() {
        let enc = Encoding::new(&instance(4));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = vec![2, 2, 2, 2, 1];
        let x = vec![0, 1, 0, 1, 1];
        assert_eq!(crossover(&enc, &g, &x, 0.0, &mut rng), x);
        assert_eq!(crossover(&enc, &g, &x, 1.0, &mut rng), g);
        assert_eq!(crossover(&enc, &x, &x, 0.5, &mut rng), x);
    }

    #[test]
    fn segment_crossover_with_identical_parents_is_identity() {
        let enc = Encoding::new(&instance(6));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = vec![0, 1, 2, 0, 1, 2, 1];
        for _ in 0..50 {
            assert_eq!(segment_crossover(&enc, &x, &x, &mut rng), x);
        }
    }

    #[test]
    fn segment_crossover_copies_a_contiguous_run() {
        let enc = Encoding::new(&instance(6));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = vec![0; 7];
        let mut g = vec![2; 7];
        g[6] = 1;
        for _ in 0..50 {
            let y = segment_crossover(&enc, &g, &x, &mut rng);
            let taken: Vec<usize> = (0..6).filter(|&k| y[k] == 2).collect();
            assert!(!taken.is_empty());
            assert_eq!(taken.len(), taken[taken.len() - 1] - taken[0] + 1);
            assert_eq!(y[6], 1);
        }
    }

    #[test]
    fn select_keeps_previous_on_ties() {
        let w = [1, 1];
        let prev = [0, 0];
        assert_eq!(select(&w, 1.0, &prev, 2.0), &w);
        assert_eq!(select(&w, 2.0, &prev, 2.0), &prev);
        assert_eq!(select(&w, 3.0, &prev, 2.0), &prev);
    }

    #[test]
    fn peers_are_distinct_and_exclude_self() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..8 {
            for i in 0..n {
                for _ in 0..200 {
                    let (a, b) = pick_peers(n, i, &mut rng);
                    assert!(
                        a < n && b < n && a != b && a != i && b != i,
                        "n={n} i={i} a={a} b={b}"
                    );
                }
            }
        }
    }
}
