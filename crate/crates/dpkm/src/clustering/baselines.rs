//! Laplace-schedule comparison baselines: Lloyd updates whose released
//! centroids are noisy-sum over noisy-count, with the total budget
//! divided across iterations by a fixed schedule.  These have no
//! convergence guarantee; they exist to be measured against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{assign, cost, Dataset, DpRunResult};
use crate::dp::{laplace_sample, BudgetLedger};
use crate::error::{Error, Result};
use crate::geometry::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// The total budget split evenly over a fixed number of iterations.
    Uniform(usize),
    /// Iteration i receives total/2^i; the loop stops once an
    /// iteration's share falls below a thousandth of the total.
    Halving,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub eps_total: f64,
    pub schedule: Schedule,
    /// Test hook: skip all noise draws, reducing the updates to Lloyd's.
    #[serde(default)]
    pub zero_noise: bool,
}

fn iteration_budgets(config: &BaselineConfig) -> Result<Vec<f64>> {
    match config.schedule {
        Schedule::Uniform(t) => {
            if t == 0 {
                return Err(Error::Config(
                    "uniform schedule needs at least one iteration".into(),
                ));
            }
            Ok(vec![config.eps_total / t as f64; t])
        }
        Schedule::Halving => {
            let mut budgets = Vec::new();
            let mut share = config.eps_total / 2.0;
            while share >= 1e-3 * config.eps_total {
                budgets.push(share);
                share /= 2.0;
            }
            Ok(budgets)
        }
    }
}

/// Run the schedule: every iteration reassigns points and replaces each
/// centroid by (sum + noise) / max(1, count + noise), with the
/// iteration's budget split evenly between the sum and the count
/// queries.  Per cluster the count noise is drawn first, then one noise
/// term per coordinate.
pub fn baseline_laplace<R: Rng + ?Sized>(
    dataset: &Dataset,
    init_centroids: &[Vector],
    config: &BaselineConfig,
    rng: &mut R,
) -> Result<DpRunResult> {
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
    if !(config.eps_total > 0.0) {
        return Err(Error::Config(format!(
            "total budget must be positive, got {}",
            config.eps_total
        )));
    }
    let budgets = iteration_budgets(config)?;

    let mut centroids = init_centroids.to_vec();
    let mut ledger = BudgetLedger::new(0.0);
    let mut cost_trace = Vec::new();

    for &eps_it in &budgets {
        let assignments = assign(dataset, &centroids);
        cost_trace.push(cost(dataset, &centroids, &assignments)?);

        let mut sums = vec![Vector::zeros(dataset.dim()); k];
        let mut counts = vec![0usize; k];
        for (x, &a) in dataset.points().iter().zip(&assignments) {
            sums[a] = sums[a].add(x);
            counts[a] += 1;
        }

        // Half the iteration budget buys the counts, half the sums; both
        // queries have sensitivity 1 on unit-box data.
        let scale = 2.0 / eps_it;
        let mut next = Vec::with_capacity(k);
        for i in 0..k {
            if config.zero_noise {
                let divisor = (counts[i] as f64).max(1.0);
                next.push(sums[i].scale(1.0 / divisor));
                continue;
            }
            let noisy_count = counts[i] as f64 + laplace_sample(scale, rng)?;
            let divisor = noisy_count.max(1.0);
            let coords = sums[i]
                .coords()
                .iter()
                .map(|&s| {
                    laplace_sample(scale, rng).map(|eta| ((s + eta) / divisor).clamp(0.0, 1.0))
                })
                .collect::<Result<Vec<f64>>>()?;
            next.push(Vector::new(coords));
        }
        ledger.push_iteration(vec![eps_it; k]);
        centroids = next;
    }

    let final_assignments = assign(dataset, &centroids);
    Ok(DpRunResult {
        prenoise_centroids: centroids.clone(),
        final_centroids: centroids,
        iterations: ledger.iterations(),
        converged: false,
        cost_trace,
        assignments: final_assignments,
        ledger,
        audit: Vec::new(),
        lloyd_reference: None,
    })
}
