use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SelectionError;

pub const DEFAULT_MAX_ITER: u32 = 100;
/// Independent k-means++ restarts; the lowest-inertia run wins.
pub const RESTARTS: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after seeding, then after every Lloyd iteration and every
    /// single-point refinement move of the winning restart.
    pub trace: Vec<f64>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia<P: AsRef<[f64]>>(points: &[P], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p.as_ref(), &centroids[c]))
        .sum()
}

fn check_input<P: AsRef<[f64]>>(points: &[P], k: usize) -> Result<usize, SelectionError> {
    if k == 0 || k > points.len() {
        return Err(SelectionError::InvalidK { k, points: points.len() });
    }
    let dim = points[0].as_ref().len();
    for (index, p) in points.iter().enumerate() {
        let found = p.as_ref().len();
        if found != dim {
            return Err(SelectionError::DimensionMismatch { index, expected: dim, found });
        }
        if dim == 0 || p.as_ref().iter().any(|v| !v.is_finite()) {
            return Err(SelectionError::NonFinite { index });
        }
    }
    Ok(dim)
}

/// Seeded k-means++ followed by Lloyd iterations and a single-point
/// refinement pass, repeated [`RESTARTS`] times from one seeded stream.
///
/// Assignment ties keep the current cluster, then prefer the lower index.
/// A cluster left empty takes the point farthest from its own centroid.
pub fn kmeans<P: AsRef<[f64]>>(points: &[P], k: usize, seed: u64, max_iter: u32) -> Result<KMeans, SelectionError> {
    let dim = check_input(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..RESTARTS {
        let run = single_run(points, k, dim, max_iter, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_centers<P: AsRef<[f64]>>(points: &[P], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].as_ref().to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p.as_ref(), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if chosen[i] || d == 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a candidate")
        } else {
            // Every point coincides with a center already.
            chosen.iter().position(|c| !c).expect("k <= n")
        };
        chosen[pick] = true;
        let c = points[pick].as_ref().to_vec();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p.as_ref(), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(p: &[f64], centroids: &[Vec<f64>], current: Option<usize>) -> usize {
    let mut best = current.unwrap_or(0);
    let mut best_d = sq_dist(p, &centroids[best]);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best_d || (d == best_d && c < best && Some(best) != current) {
            best = c;
            best_d = d;
        }
    }
    best
}

fn means<P: AsRef<[f64]>>(points: &[P], assignments: &[usize], k: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p.as_ref()) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            for v in s.iter_mut() {
                *v /= n as f64;
            }
        }
    }
    (sums, counts)
}

/// Moves points into empty clusters, farthest-from-own-centroid first.
fn repair_empty<P: AsRef<[f64]>>(points: &[P], assignments: &mut [usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let (centroids, counts) = means(points, assignments, k, dim);
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return centroids;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let c = assignments[i];
            if counts[c] < 2 {
                continue;
            }
            let d = sq_dist(p.as_ref(), &centroids[c]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        assignments[far.expect("k <= n leaves a donor cluster")] = empty;
    }
}

fn single_run<P: AsRef<[f64]>>(points: &[P], k: usize, dim: usize, max_iter: u32, rng: &mut ChaCha8Rng) -> KMeans {
    let seeds = seed_centers(points, k, rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p.as_ref(), &seeds, None)).collect();
    let mut trace = vec![inertia(points, &assignments, &seeds)];

    let mut centroids = repair_empty(points, &mut assignments, k, dim);
    for _ in 0..max_iter {
        let next: Vec<usize> = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| nearest(p.as_ref(), &centroids, Some(a)))
            .collect();
        let changed = next != assignments;
        assignments = next;
        centroids = repair_empty(points, &mut assignments, k, dim);
        trace.push(inertia(points, &assignments, &centroids));
        if !changed {
            break;
        }
    }

    refine(points, &mut assignments, &mut centroids, k, dim, &mut trace);
    let inertia = inertia(points, &assignments, &centroids);
    KMeans {
        assignments,
        centroids,
        inertia,
        trace,
    }
}

/// Single-point moves that lower inertia, accounting for both centroids
/// shifting. Stops when no move helps; singletons never move.
fn refine<P: AsRef<[f64]>>(
    points: &[P],
    assignments: &mut [usize],
    centroids: &mut Vec<Vec<f64>>,
    k: usize,
    dim: usize,
    trace: &mut Vec<f64>,
) {
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    let budget = 100 * points.len();
    for _ in 0..budget {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if counts[a] < 2 {
                continue;
            }
            let na = counts[a] as f64;
            let leave = na / (na - 1.0) * sq_dist(p.as_ref(), &centroids[a]);
            for b in (0..k).filter(|&b| b != a) {
                let nb = counts[b] as f64;
                let join = nb / (nb + 1.0) * sq_dist(p.as_ref(), &centroids[b]);
                let delta = join - leave;
                if delta < -1e-12 * (1.0 + leave) && best.is_none_or(|(_, _, d)| delta < d) {
                    best = Some((i, b, delta));
                }
            }
        }
        let Some((i, b, _)) = best else {
            return;
        };
        counts[assignments[i]] -= 1;
        counts[b] += 1;
        assignments[i] = b;
        *centroids = means(points, assignments, k, dim).0;
        trace.push(inertia(points, assignments, centroids));
    }
}
