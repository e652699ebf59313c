//! Density-based clustering of region index vectors.
//!
//! Distances are computed on the integer grid indices, not on real
//! coordinates: the densely-packed ball on the lattice is a Chebyshev
//! ball, which makes the packing-radius selection exact. Cluster ids are
//! assigned in first-core-point discovery order under the canonical
//! (lexicographic) point ordering, and border points attach to the first
//! cluster that reaches them, so the full labeling is deterministic.

use std::collections::HashMap;

use crate::model::{ClusterMetric, RegionIndex};

/// Cluster labels for a point set. `points` is in canonical
/// (lexicographic) order; `labels[i]` is `Some(id)` with ids contiguous in
/// `1..=clusters`, or `None` for noise. `core[i]` marks core points.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub points: Vec<RegionIndex>,
    pub labels: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub clusters: usize,
}

impl ClusterResult {
    /// Members of one cluster, in canonical order.
    pub fn members(&self, cluster: usize) -> Vec<RegionIndex> {
        self.points
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| **l == Some(cluster))
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Minimum cluster size meeting the relaxed representation threshold:
/// `max(1, ceil(tau_rep * |Gamma_X|))`.
pub fn min_samples(tau_rep: f64, n_interesting: usize) -> usize {
    let fractional = (tau_rep * n_interesting as f64).ceil() as usize;
    fractional.max(1)
}

/// Smallest radius whose ball on the integer lattice can hold `min_s`
/// points when densely packed: the least integer `r >= 1` with
/// `(2r + 1)^d >= min_s` under Chebyshev distance. For the Euclidean
/// metric the Chebyshev ball is circumscribed, multiplying by `sqrt(d)`.
pub fn packing_radius(min_s: usize, dimension: usize, metric: ClusterMetric) -> f64 {
    debug_assert!(dimension >= 1);
    let mut r: u64 = 1;
    while ball_cells(r, dimension) < min_s as u128 {
        r += 1;
    }
    match metric {
        ClusterMetric::Chebyshev => r as f64,
        ClusterMetric::Euclidean => r as f64 * (dimension as f64).sqrt(),
    }
}

fn ball_cells(r: u64, dimension: usize) -> u128 {
    let side = 2u128 * r as u128 + 1;
    let mut acc: u128 = 1;
    for _ in 0..dimension {
        acc = acc.saturating_mul(side);
    }
    acc
}

fn within(metric: ClusterMetric, a: &[u32], b: &[u32], radius: f64, radius_sq: f64) -> bool {
    match metric {
        ClusterMetric::Chebyshev => {
            let mut max = 0u32;
            for (&x, &y) in a.iter().zip(b) {
                let d = x.abs_diff(y);
                if d > max {
                    max = d;
                }
            }
            (max as f64) <= radius
        }
        ClusterMetric::Euclidean => {
            let mut acc = 0.0f64;
            for (&x, &y) in a.iter().zip(b) {
                let d = x.abs_diff(y) as f64;
                acc += d * d;
            }
            acc <= radius_sq
        }
    }
}

/// Neighbor lists (self-inclusive, ascending) for every point, built from
/// a spatial hash of index blocks of side `2*ceil(r) + 1`. Points within
/// `radius` of a point can only live in blocks whose per-dimension block
/// index differs by at most one.
fn neighbor_lists(
    points: &[RegionIndex],
    radius: f64,
    metric: ClusterMetric,
) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return vec![];
    }
    let side = 2 * (radius.ceil().max(1.0) as u32) + 1;

    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key: Vec<u32> = p.as_slice().iter().map(|&c| c / side).collect();
        buckets.entry(key).or_default().push(i);
    }

    // Occupied-bucket adjacency, restricted to a sorted first-coordinate
    // window so sparse high-dimensional tables stay near-linear.
    let mut keys: Vec<&Vec<u32>> = buckets.keys().collect();
    keys.sort_unstable();
    let adjacent = |a: &[u32], b: &[u32]| a.iter().zip(b).all(|(x, y)| x.abs_diff(*y) <= 1);

    let radius_sq = radius * radius;
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for key in &keys {
        let start = keys.partition_point(|k| k[0] + 1 < key[0]);
        let members = &buckets[key.as_slice()];
        for other in &keys[start..] {
            if other[0] > key[0] + 1 {
                break;
            }
            if !adjacent(key, other) {
                continue;
            }
            let candidates = &buckets[other.as_slice()];
            for &i in members {
                for &j in candidates {
                    if within(
                        metric,
                        points[i].as_slice(),
                        points[j].as_slice(),
                        radius,
                        radius_sq,
                    ) {
                        neighbors[i].push(j);
                    }
                }
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    neighbors
}

/// Standard DBSCAN over distinct region indices. A core point has at
/// least `min_s` points (itself included) within `radius`; clusters are
/// maximal density-connected sets; unreachable points are noise.
pub fn dbscan(
    points: &[RegionIndex],
    radius: f64,
    min_s: usize,
    metric: ClusterMetric,
) -> ClusterResult {
    let mut points: Vec<RegionIndex> = points.to_vec();
    points.sort_unstable();
    points.dedup();
    let n = points.len();

    let neighbors = neighbor_lists(&points, radius, metric);
    let core: Vec<bool> = neighbors.iter().map(|ns| ns.len() >= min_s).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut clusters = 0usize;
    let mut queue: Vec<usize> = Vec::new();
    for seed in 0..n {
        if labels[seed].is_some() || !core[seed] {
            continue;
        }
        clusters += 1;
        labels[seed] = Some(clusters);
        queue.clear();
        queue.push(seed);
        let mut at = 0;
        while at < queue.len() {
            let p = queue[at];
            at += 1;
            for &q in &neighbors[p] {
                if labels[q].is_none() {
                    labels[q] = Some(clusters);
                    if core[q] {
                        queue.push(q);
                    }
                }
            }
        }
    }

    ClusterResult {
        points,
        labels,
        core,
        clusters,
    }
}
