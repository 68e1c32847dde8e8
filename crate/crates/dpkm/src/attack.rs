//! Reconstruction of a missing record from released cluster means.
//!
//! If an adversary sees a cluster's mean with and without one record,
//! plus the cluster size, the record falls out of plain algebra:
//! x0 = n * mean_with - (n-1) * mean_without.  The demo shows the
//! recovery is exact against noise-free releases and degrades once the
//! releases go through the noisy-count mechanism.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{assign, lloyd, Dataset};
use crate::dp::laplace_sample;
use crate::error::{Error, Result};
use crate::geometry::{distance, mean, Vector};

/// What the adversary observes about one cluster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReleasePair {
    /// Cluster size including the missing record.
    pub n: usize,
    /// Cluster mean with the record present.
    pub mean_with: Vector,
    /// Cluster mean with the record removed.
    pub mean_without: Vector,
}

impl ReleasePair {
    pub fn new(n: usize, mean_with: Vector, mean_without: Vector) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "reconstruction needs a cluster of at least 2, got {n}"
            )));
        }
        if mean_with.dim() != mean_without.dim() {
            return Err(Error::DimensionMismatch(
                mean_with.dim(),
                mean_without.dim(),
            ));
        }
        Ok(ReleasePair {
            n,
            mean_with,
            mean_without,
        })
    }
}

/// The algebraic inversion: x0 = n * mean_with - (n-1) * mean_without.
pub fn reconstruct_missing(pair: &ReleasePair) -> Vector {
    let n = pair.n as f64;
    pair.mean_with
        .scale(n)
        .sub(&pair.mean_without.scale(n - 1.0))
}

/// One removal experiment: the record, what exact releases give away,
/// and (when a budget is set) what the noisy releases give away.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoTrial {
    pub cluster: usize,
    pub target_index: usize,
    pub true_point: Vector,
    pub exact_reconstruction: Vector,
    pub exact_error: f64,
    pub noisy_reconstruction: Option<Vector>,
    pub noisy_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoReport {
    pub k: usize,
    pub eps0: f64,
    pub demos: Vec<DemoTrial>,
    pub max_exact_error: f64,
    pub mean_noisy_error: Option<f64>,
    pub median_noisy_error: Option<f64>,
}

/// Release a cluster's mean the way the private pipeline does: exact
/// sum over a noisy count (clamped at 1), coordinates clamped to the
/// unit box.
fn noisy_mean<R: Rng + ?Sized>(
    sum: &Vector,
    count: usize,
    eps0: f64,
    rng: &mut R,
) -> Result<Vector> {
    let noisy_count = count as f64 + laplace_sample(1.0 / eps0, rng)?;
    let divisor = noisy_count.max(1.0);
    Ok(Vector::new(
        sum.coords()
            .iter()
            .map(|&s| (s / divisor).clamp(0.0, 1.0))
            .collect(),
    ))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Run `demos` removal experiments against a fixed Lloyd partition of
/// `dataset`.  Each experiment removes one random record from a cluster
/// of size at least 2, reconstructs it exactly from exact releases,
/// and, when `eps0 > 0`, from releases noised at that budget.
/// `eps0 = 0` runs the noise-free branch only.
pub fn demo<R: Rng + ?Sized>(
    dataset: &Dataset,
    k: usize,
    eps0: f64,
    demos: usize,
    rng: &mut R,
) -> Result<DemoReport> {
    if eps0 < 0.0 {
        return Err(Error::Config(format!(
            "eps0 must be nonnegative, got {eps0}"
        )));
    }
    if demos < 1 {
        return Err(Error::Config("need at least one demo".into()));
    }
    if dataset.len() < k + 1 {
        return Err(Error::Config(format!(
            "need more records than clusters to remove one (N={}, k={k})",
            dataset.len()
        )));
    }

    // A fixed partition isolates the released-means algebra from
    // assignment churn.
    let init: Vec<Vector> = rand::seq::index::sample(rng, dataset.len(), k)
        .iter()
        .map(|i| dataset.point(i).clone())
        .collect();
    let partition = lloyd(dataset, &init, 200)?;
    let assignments = assign(dataset, &partition.centroids);

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (idx, &a) in assignments.iter().enumerate() {
        clusters[a].push(idx);
    }
    let eligible: Vec<usize> = (0..dataset.len())
        .filter(|&idx| clusters[assignments[idx]].len() >= 2)
        .collect();
    if eligible.is_empty() {
        return Err(Error::Config(
            "every cluster is a singleton; nothing can be removed".into(),
        ));
    }

    let mut trials = Vec::with_capacity(demos);
    let mut max_exact_error = 0.0f64;
    let mut noisy_errors = Vec::new();
    for _ in 0..demos {
        let target_index = eligible[rng.random_range(0..eligible.len())];
        let cluster = assignments[target_index];
        let members = &clusters[cluster];
        let n = members.len();
        let true_point = dataset.point(target_index).clone();

        let mean_with = mean(members.iter().map(|&i| dataset.point(i)))?;
        let mean_without = mean(
            members
                .iter()
                .filter(|&&i| i != target_index)
                .map(|&i| dataset.point(i)),
        )?;
        let pair = ReleasePair::new(n, mean_with, mean_without)?;
        let exact_reconstruction = reconstruct_missing(&pair);
        let exact_error = distance(&exact_reconstruction, &true_point)?;
        max_exact_error = max_exact_error.max(exact_error);

        let (noisy_reconstruction, noisy_error) = if eps0 > 0.0 {
            let mut sum_with = Vector::zeros(dataset.dim());
            for &i in members {
                sum_with = sum_with.add(dataset.point(i));
            }
            let sum_without = sum_with.sub(&true_point);
            // Independent noise on each of the two releases.
            let noisy_with = noisy_mean(&sum_with, n, eps0, rng)?;
            let noisy_without = noisy_mean(&sum_without, n - 1, eps0, rng)?;
            let noisy_pair = ReleasePair::new(n, noisy_with, noisy_without)?;
            let rec = reconstruct_missing(&noisy_pair);
            let err = distance(&rec, &true_point)?;
            noisy_errors.push(err);
            (Some(rec), Some(err))
        } else {
            (None, None)
        };

        trials.push(DemoTrial {
            cluster,
            target_index,
            true_point,
            exact_reconstruction,
            exact_error,
            noisy_reconstruction,
            noisy_error,
        });
    }

    let (mean_noisy_error, median_noisy_error) = if noisy_errors.is_empty() {
        (None, None)
    } else {
        let total: f64 = noisy_errors.iter().sum();
        let mut sorted = noisy_errors.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (
            Some(total / noisy_errors.len() as f64),
            Some(median(&sorted)),
        )
    };

    Ok(DemoReport {
        k,
        eps0,
        demos: trials,
        max_exact_error,
        mean_noisy_error,
        median_noisy_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn the_three_point_line_reconstructs_its_missing_point() {
        // {1,2,3} with 3 removed: mean drops from 2 to 1.5.
        let pair = ReleasePair::new(
            3,
            Vector::new(vec![2.0]),
            Vector::new(vec![1.5]),
        )
        .unwrap();
        assert_eq!(reconstruct_missing(&pair), Vector::new(vec![3.0]));
    }

    #[test]
    fn a_pair_of_points_reconstructs_in_two_dimensions() {
        let pair = ReleasePair::new(
            2,
            Vector::new(vec![1.0, 1.0]),
            Vector::new(vec![0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(reconstruct_missing(&pair), Vector::new(vec![2.0, 2.0]));
    }

    #[test]
    fn degenerate_pairs_are_rejected() {
        assert!(ReleasePair::new(1, Vector::new(vec![1.0]), Vector::new(vec![1.0])).is_err());
        assert!(ReleasePair::new(3, Vector::new(vec![1.0]), Vector::new(vec![1.0, 2.0])).is_err());
    }

    fn blob_dataset() -> Dataset {
        crate::harness::data::synthetic_blobs(3, 20, 2, 0.04, 5).unwrap()
    }

    #[test]
    fn noise_free_reconstruction_is_exact() {
        let data = blob_dataset();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let report = demo(&data, 3, 0.0, 50, &mut rng).unwrap();
        assert_eq!(report.demos.len(), 50);
        assert!(report.max_exact_error <= 1e-9, "{}", report.max_exact_error);
        assert!(report.mean_noisy_error.is_none());
        for trial in &report.demos {
            assert!(trial.noisy_reconstruction.is_none());
        }
    }

    #[test]
    fn noisy_releases_break_the_reconstruction() {
        let data = blob_dataset();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = demo(&data, 3, 0.5, 100, &mut rng).unwrap();
        assert!(report.max_exact_error <= 1e-9);
        let median = report.median_noisy_error.unwrap();
        assert!(median > 0.1, "median noisy error {median} too small");
    }

    #[test]
    fn error_shrinks_as_the_budget_grows() {
        let data = blob_dataset();
        let mut means = Vec::new();
        for (i, eps0) in [0.1, 0.5, 1.0, 10.0].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let report = demo(&data, 3, eps0, 100, &mut rng).unwrap();
            means.push(report.mean_noisy_error.unwrap());
        }
        // Monotone nonincreasing in expectation; allow one sampling
        // inversion.
        let inversions = means.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(inversions <= 1, "means {means:?}");
    }

    #[test]
    fn a_huge_budget_restores_the_attack() {
        let data = blob_dataset();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let report = demo(&data, 3, 1e9, 50, &mut rng).unwrap();
        assert!(report.mean_noisy_error.unwrap() < 1e-3);
    }

    #[test]
    fn negative_budgets_and_tiny_datasets_are_rejected() {
        let data = blob_dataset();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(demo(&data, 3, -0.5, 10, &mut rng).is_err());
        assert!(demo(&data, 3, 0.5, 0, &mut rng).is_err());
        let tiny = Dataset::new(vec![Vector::new(vec![0.1]), Vector::new(vec![0.9])]).unwrap();
        assert!(demo(&tiny, 2, 0.5, 10, &mut rng).is_err());
    }
}
