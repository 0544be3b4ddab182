//! Representative frames: k-means over per-frame features, nearest-centroid
//! picks, and a PCA scatter for inspection.

mod kmeans;
mod pca;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use kmeans::{inertia, kmeans, KMeans, DEFAULT_MAX_ITER, RESTARTS};
pub use pca::symmetric_eigen;

use crate::backend::FeatureVector;
use crate::simplification::SimplificationSequence;
use kmeans::sq_dist;

pub const DEFAULT_K: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectionError {
    #[error("k = {k} is outside 1..={points}")]
    InvalidK { k: usize, points: usize },
    #[error("vector {index} has {found} dimensions, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("vector {index} is empty or not finite")]
    NonFinite { index: usize },
    #[error("{frames} frames but {features} feature vectors")]
    AlignmentMismatch { frames: usize, features: usize },
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        self.values()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub trace: Vec<f64>,
    /// Frame indices, one per cluster, in ascending step order.
    pub representatives: Vec<usize>,
}

/// Clusters `features` into `min(k, n)` groups and picks, per cluster, the
/// frame nearest the centroid (ties go to the smaller step).
pub fn select_by_steps(
    steps: &[u32],
    features: &[FeatureVector],
    k: usize,
    seed: u64,
) -> Result<ClusteringResult, SelectionError> {
    if steps.len() != features.len() {
        return Err(SelectionError::AlignmentMismatch {
            frames: steps.len(),
            features: features.len(),
        });
    }
    if features.is_empty() {
        return Err(SelectionError::TooFewPoints { needed: 1, found: 0 });
    }
    let k = k.min(features.len());
    let km = kmeans(features, k, seed, DEFAULT_MAX_ITER)?;
    let mut representatives: Vec<usize> = (0..k)
        .map(|c| {
            let mut members = km.assignments.iter().enumerate().filter(|(_, &a)| a == c).map(|(i, _)| i);
            let first = members.next().expect("clusters are non-empty");
            members.fold(first, |best, i| {
                let (d, bd) = (sq_dist(features[i].values(), &km.centroids[c]), sq_dist(features[best].values(), &km.centroids[c]));
                if d < bd || (d == bd && steps[i] < steps[best]) { i } else { best }
            })
        })
        .collect();
    representatives.sort_by_key(|&i| (steps[i], i));
    Ok(ClusteringResult {
        k,
        assignments: km.assignments,
        centroids: km.centroids,
        inertia: km.inertia,
        trace: km.trace,
        representatives,
    })
}

pub fn select_representatives(
    seq: &SimplificationSequence,
    features: &[FeatureVector],
    k: usize,
    seed: u64,
) -> Result<ClusteringResult, SelectionError> {
    let steps: Vec<u32> = seq.frames.iter().map(|f| f.step).collect();
    select_by_steps(&steps, features, k, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub cluster: usize,
    pub step: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub points: Vec<ScatterPoint>,
    pub centroids: Vec<Point2>,
    /// Variance along each of the two axes.
    pub variance: [f64; 2],
    /// Set when every point is identical; all coordinates are then zero.
    pub degenerate: bool,
}

/// Projects features and centroids onto the top two principal components.
/// Each axis is signed so its largest-magnitude loading is positive.
pub fn export_scatter(
    result: &ClusteringResult,
    features: &[FeatureVector],
    steps: &[u32],
) -> Result<Scatter, SelectionError> {
    let n = features.len();
    if n < 2 {
        return Err(SelectionError::TooFewPoints { needed: 2, found: n });
    }
    if steps.len() != n || result.assignments.len() != n {
        return Err(SelectionError::AlignmentMismatch {
            frames: steps.len().min(result.assignments.len()),
            features: n,
        });
    }
    let d = features[0].len();
    if let Some(index) = features.iter().position(|f| f.len() != d) {
        return Err(SelectionError::DimensionMismatch {
            index,
            expected: d,
            found: features[index].len(),
        });
    }
    let mut mean = alloc::vec![0.0; d];
    for f in features {
        for (m, v) in mean.iter_mut().zip(f.values()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = features
        .iter()
        .map(|f| f.values().iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let degenerate = centered.iter().all(|row| row.iter().all(|&v| v == 0.0));
    let project = |v: &[f64], axes: &[Vec<f64>]| -> Point2 {
        let dot = |axis: &Vec<f64>| v.iter().zip(&mean).zip(axis).map(|((x, m), a)| (x - m) * a).sum::<f64>();
        Point2 { x: dot(&axes[0]), y: dot(&axes[1]) }
    };

    let (variance, axes) = if degenerate {
        ([0.0, 0.0], alloc::vec![alloc::vec![0.0; d]; 2])
    } else {
        let (values, axes) = pca::principal_axes(&centered, 2);
        ([values[0], values[1]], axes)
    };
    let points = features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let p = project(f.values(), &axes);
            ScatterPoint {
                x: p.x,
                y: p.y,
                cluster: result.assignments[i],
                step: steps[i],
            }
        })
        .collect();
    let centroids = result.centroids.iter().map(|c| project(c, &axes)).collect();
    Ok(Scatter {
        points,
        centroids,
        variance,
        degenerate,
    })
}
