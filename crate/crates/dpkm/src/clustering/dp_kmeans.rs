use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::zones::{
    build_sampling_zone, finalize_laplace, orientation_future, orientation_past,
    sample_private_centroid, ZoneAudit,
};
use crate::clustering::{assign, cost, recentroid, Dataset};
use crate::dp::BudgetLedger;
use crate::error::{Error, Result};
use crate::geometry::{distance, Vector};

/// What the aim point for each cluster's perturbation is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Reflect the previous centroid and rotate: only already-released
    /// information is consumed.  Conventionally called "posterior".
    Past,
    /// Peek one assignment step ahead and aim at the mean the cluster
    /// is moving toward.  Conventionally called "prior".
    PastAndFuture,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "past" | "posterior" => Ok(Strategy::Past),
            "past-and-future" | "past_and_future" | "future" | "prior" => {
                Ok(Strategy::PastAndFuture)
            }
            other => Err(Error::Config(format!(
                "unknown strategy '{other}' (expected posterior/past or prior/past-and-future)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Past => "posterior",
            Strategy::PastAndFuture => "prior",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DpConfig {
    /// Budget spent on each cluster's draw in each sampled iteration.
    pub eps_iter: f64,
    /// Budget of the final noisy-count release.
    pub eps0: f64,
    /// Stop once no centroid's real mean moved further than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Candidate grid resolution (radial cells, angular cells).
    pub grid: (usize, usize),
    /// Test hook: adopt the real means and release them without noise,
    /// reducing the run to Lloyd's.
    #[serde(default)]
    pub zero_noise: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            eps_iter: 0.5,
            eps0: 0.5,
            tol: 1e-4,
            max_iter: 200,
            grid: (64, 64),
            zero_noise: false,
        }
    }
}

/// Same-initialization reference run, recorded next to a private run so
/// reports can compare the two without re-running anything.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LloydReference {
    pub centroids: Vec<Vector>,
    pub iterations: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DpRunResult {
    /// Released centroids (after the noisy-count finalization).
    pub final_centroids: Vec<Vector>,
    /// Exact means of the final partition, before finalization noise.
    pub prenoise_centroids: Vec<Vector>,
    /// Iterations that performed a private draw.
    pub iterations: usize,
    pub converged: bool,
    pub cost_trace: Vec<f64>,
    pub assignments: Vec<usize>,
    pub ledger: BudgetLedger,
    pub audit: Vec<ZoneAudit>,
    pub lloyd_reference: Option<LloydReference>,
}

/// Privacy-preserving k-means.
///
/// Per iteration: points are assigned to the current private centroids,
/// real cluster means are computed, and -- unless those means moved less
/// than `tol` or the partition stopped changing -- each cluster's next
/// centroid is drawn privately from a sampling zone nested inside its
/// convergent zone, charging `eps_iter` per cluster to the ledger.  The
/// final centroids are released through noisy counts under `eps0`.
pub fn dp_kmeans<R: Rng + ?Sized>(
    dataset: &Dataset,
    strategy: Strategy,
    init_centroids: &[Vector],
    config: &DpConfig,
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
    for c in init_centroids {
        if c.dim() != dataset.dim() {
            return Err(Error::DimensionMismatch(dataset.dim(), c.dim()));
        }
    }
    if !(config.eps_iter > 0.0) {
        return Err(Error::Config(format!(
            "eps_iter must be positive, got {}",
            config.eps_iter
        )));
    }
    if !(config.tol > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            config.tol
        )));
    }

    let mut hat = init_centroids.to_vec();
    let mut prev_assignments: Option<Vec<usize>> = None;
    let mut ledger = BudgetLedger::new(config.eps0);
    let mut cost_trace = Vec::new();
    let mut audit = Vec::new();
    let mut converged = false;
    let mut final_assignments = Vec::new();
    let mut prenoise = hat.clone();

    for t in 1..=config.max_iter {
        let assignments = assign(dataset, &hat);
        cost_trace.push(cost(dataset, &hat, &assignments)?);
        let means = recentroid(dataset, &assignments, k, &hat);

        let repeated = prev_assignments.as_deref() == Some(&assignments[..]);
        let mut max_move = 0.0f64;
        for (m, h) in means.iter().zip(&hat) {
            max_move = max_move.max(distance(m, h)?);
        }
        if repeated || max_move < config.tol {
            converged = true;
            prenoise = means;
            final_assignments = assignments;
            break;
        }

        let next_hat = if config.zero_noise {
            means
        } else {
            let mut next_hat = Vec::with_capacity(k);
            for i in 0..k {
                match perturb_cluster(dataset, strategy, &hat[i], &means, i, config, t, rng)? {
                    Some((s_hat, row)) => {
                        audit.push(row);
                        next_hat.push(s_hat);
                    }
                    // Degenerate cluster (no movement): carry the previous
                    // centroid; the budget row below still charges it.
                    None => next_hat.push(hat[i].clone()),
                }
            }
            next_hat
        };
        ledger.push_iteration(vec![config.eps_iter; k]);
        prev_assignments = Some(assignments);
        hat = next_hat;
    }

    if !converged {
        final_assignments = assign(dataset, &hat);
        prenoise = recentroid(dataset, &final_assignments, k, &hat);
    }

    let final_centroids = if config.zero_noise {
        crate::clustering::zones::finalize_with_noise(dataset, &final_assignments, k, &vec![0.0; k])?
    } else {
        finalize_laplace(dataset, &final_assignments, k, config.eps0, rng)?
    };

    Ok(DpRunResult {
        final_centroids,
        prenoise_centroids: prenoise,
        iterations: ledger.iterations(),
        converged,
        cost_trace,
        assignments: final_assignments,
        ledger,
        audit,
        lloyd_reference: None,
    })
}

/// One cluster's private draw.  Returns None when the cluster offers no
/// room to sample (its mean did not move, or the aim point collapsed
/// onto the mean).
fn perturb_cluster<R: Rng + ?Sized>(
    dataset: &Dataset,
    strategy: Strategy,
    hat_i: &Vector,
    means: &[Vector],
    i: usize,
    config: &DpConfig,
    iteration: usize,
    rng: &mut R,
) -> Result<Option<(Vector, ZoneAudit)>> {
    let s = &means[i];
    let a = distance(s, hat_i)?;
    if a == 0.0 {
        return Ok(None);
    }

    let aim = match strategy {
        Strategy::Past => orientation_past(hat_i, s, rng)?,
        Strategy::PastAndFuture => orientation_future(dataset, means, i)?,
    };
    let b = distance(s, &aim)?;
    if b == 0.0 {
        return Ok(None);
    }
    // The descent guarantee needs the whole sampling ball inside the
    // convergent zone, so an aim point beyond the zone boundary (possible
    // with the look-ahead strategy) is pulled radially onto it.
    let aim = if b > a { s.add(&aim.sub(s).scale(a / b)) } else { aim };

    // A ball-center fraction drawn extremely close to 1 can leave no grid
    // cell inside the ball.  The fraction's law does not depend on the
    // data, so redrawing the zone until a candidate exists is plain
    // rejection sampling and costs no extra budget.
    let mut attempts = 0;
    let (s_hat, ball_center_offset, ball_radius) = loop {
        let zone = build_sampling_zone(s, &aim, rng)?;
        match sample_private_centroid(&zone, config.eps_iter, config.grid, rng) {
            Ok((point, _delta, _alpha)) => {
                let offset = distance(&zone.ball.center, s)?;
                break (point, offset, zone.ball.radius);
            }
            Err(Error::GridTooCoarse) if attempts < 32 => attempts += 1,
            Err(e) => return Err(e),
        }
    };

    let row = ZoneAudit {
        iteration,
        cluster: i,
        convergent_radius: a,
        ball_center_offset,
        ball_radius,
        hat_offset: distance(s, &s_hat)?,
    };
    Ok(Some((s_hat, row)))
}
