//! k-means engines: plain Lloyd iteration, the privacy-preserving variant
//! with zone-confined centroid perturbation, and Laplace-schedule
//! baselines, all behind a name-keyed registry.

mod baselines;
mod dp_kmeans;
mod lloyd;
mod registry;
mod zones;

pub use baselines::{baseline_laplace, BaselineConfig, Schedule};
pub use dp_kmeans::{dp_kmeans, DpConfig, DpRunResult, LloydReference, Strategy};
pub use lloyd::lloyd;
pub use registry::{AlgoParams, Clusterer, Registry, RunRecord};
pub use zones::{
    build_sampling_zone, build_sampling_zone_at, finalize_laplace, finalize_with_noise,
    orientation_future, orientation_past, orientation_past_at, sample_private_centroid, score,
    SamplingZoneSpec, ZoneAudit, SCORE_SENSITIVITY,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, mean, Vector};

/// An in-memory point set of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<Vector>,
    dim: usize,
}

impl Dataset {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(dim, p.dim()));
            }
        }
        Ok(Dataset { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty point sets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &Vector {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }
}

/// The moving parts of an iterative clustering run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusteringState {
    pub centroids: Vec<Vector>,
    pub assignments: Vec<usize>,
    /// Completed iterations.
    pub iteration: usize,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
}

pub(crate) fn dist_sq(a: &Vector, b: &Vector) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Total within-cluster sum of squared distances.
pub fn cost(dataset: &Dataset, centroids: &[Vector], assignments: &[usize]) -> Result<f64> {
    if assignments.len() != dataset.len() {
        return Err(Error::Config(format!(
            "{} assignments for {} points",
            assignments.len(),
            dataset.len()
        )));
    }
    let mut total = 0.0;
    for (x, &a) in dataset.points().iter().zip(assignments) {
        let c = centroids.get(a).ok_or(Error::ClusterIndexOutOfRange {
            index: a,
            k: centroids.len(),
        })?;
        total += dist_sq(x, c);
    }
    Ok(total)
}

/// Map every point to its nearest centroid; ties go to the lowest index.
pub fn assign(dataset: &Dataset, centroids: &[Vector]) -> Vec<usize> {
    debug_assert!(!centroids.is_empty());
    dataset
        .points()
        .iter()
        .map(|x| {
            let mut best = 0usize;
            let mut best_d = dist_sq(x, &centroids[0]);
            for (i, c) in centroids.iter().enumerate().skip(1) {
                let d = dist_sq(x, c);
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Mean of each cluster; a cluster that received no points keeps its
/// previous centroid.
pub fn recentroid(
    dataset: &Dataset,
    assignments: &[usize],
    k: usize,
    prev_centroids: &[Vector],
) -> Vec<Vector> {
    debug_assert_eq!(assignments.len(), dataset.len());
    debug_assert_eq!(prev_centroids.len(), k);
    let mut sums = vec![Vector::zeros(dataset.dim()); k];
    let mut counts = vec![0usize; k];
    for (x, &a) in dataset.points().iter().zip(assignments) {
        debug_assert!(a < k);
        sums[a] = sums[a].add(x);
        counts[a] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .zip(prev_centroids)
        .map(|((sum, count), prev)| {
            if count == 0 {
                prev.clone()
            } else {
                sum.scale(1.0 / count as f64)
            }
        })
        .collect()
}

/// Both sides of the identity that moving a cluster's centroid to its
/// mean lowers that cluster's cost by exactly (cluster size) x (squared
/// movement distance): lhs is the measured cost drop, rhs the closed
/// form.  `s_cur` must actually be the mean for the identity to hold.
pub fn recentroid_cost_drop(cluster: &[Vector], s_prev: &Vector, s_cur: &Vector) -> Result<(f64, f64)> {
    let m = mean(cluster.iter())?;
    let offset = distance(&m, s_cur)?;
    if offset > 1e-9 {
        return Err(Error::NotClusterMean { offset });
    }
    if s_prev.dim() != s_cur.dim() {
        return Err(Error::DimensionMismatch(s_cur.dim(), s_prev.dim()));
    }
    let at_prev: f64 = cluster.iter().map(|x| dist_sq(x, s_prev)).sum();
    let at_cur: f64 = cluster.iter().map(|x| dist_sq(x, s_cur)).sum();
    Ok((at_prev - at_cur, cluster.len() as f64 * dist_sq(s_prev, s_cur)))
}
