use crate::clustering::{assign, cost, recentroid, ClusteringState, Dataset};
use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Plain Lloyd iteration from the given initial centroids.
///
/// Each iteration reassigns every point to its nearest centroid and
/// recomputes cluster means; the loop stops when the centroids come out
/// identical two iterations in a row.  The recorded cost trace holds the
/// objective after each recentroid step, so it decreases strictly until
/// the final repeated value.
pub fn lloyd(dataset: &Dataset, init_centroids: &[Vector], max_iter: usize) -> Result<ClusteringState> {
    let k = init_centroids.len();
    if k == 0 {
        return Err(Error::Config("need at least one initial centroid".into()));
    }
    if k > dataset.len() {
        return Err(Error::TooManyClusters {
            k,
            n: dataset.len(),
        });
    }
    for c in init_centroids {
        if c.dim() != dataset.dim() {
            return Err(Error::DimensionMismatch(dataset.dim(), c.dim()));
        }
    }

    let mut centroids = init_centroids.to_vec();
    let mut assignments = Vec::new();
    let mut cost_trace = Vec::new();
    let mut converged = false;
    let mut iteration = 0;

    for t in 1..=max_iter {
        assignments = assign(dataset, &centroids);
        let new_centroids = recentroid(dataset, &assignments, k, &centroids);
        cost_trace.push(cost(dataset, &new_centroids, &assignments)?);
        iteration = t;
        if new_centroids == centroids {
            converged = true;
            break;
        }
        centroids = new_centroids;
    }

    Ok(ClusteringState {
        centroids,
        assignments,
        iteration,
        cost_trace,
        converged,
    })
}
