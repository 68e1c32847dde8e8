//! Construction of the perturbation sampling zone and the private draw
//! from it.
//!
//! Each iteration a cluster's centroid has moved from its previous
//! (perturbed) position to the new real mean S.  Every point strictly
//! inside the ball around S whose radius is that movement distance is a
//! valid perturbed centroid: adopting it still lowers the objective.
//! The code below picks an aim point X on or inside that ball's
//! boundary, shrinks to a smaller ball tucked between the midpoint of
//! S-X and X, and draws the released centroid from a score-weighted grid
//! over that smaller ball.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{assign, Dataset};
use crate::dp::{
    exp_mechanism_index, laplace_sample, local_sensitivity_count, TruncatedExpDensity,
};
use crate::error::{Error, Result};
use crate::geometry::{
    distance, mean, random_orthonormal, rotate_about, Ball, SamplingFrame, Vector,
};

/// Local sensitivity of the (delta, alpha) score below: moving one record
/// can flip the score between its extremes 0 and 2.
pub const SCORE_SENSITIVITY: f64 = 2.0;

/// Utility of a candidate at radial fraction `delta`, angle `alpha`:
/// closeness to the real mean along both polar coordinates.  Maximal (2)
/// at the mean itself, minimal (0) at the far rim sideways.
pub fn score(delta: f64, alpha: f64) -> f64 {
    (1.0 - delta) + (1.0 - 2.0 * alpha.abs() / std::f64::consts::PI)
}

/// The ball a private centroid is drawn from, plus the polar frame that
/// addresses its points from the real mean.
#[derive(Debug, Clone)]
pub struct SamplingZoneSpec {
    pub ball: Ball,
    pub frame: SamplingFrame,
}

/// Measured geometry of one private draw, kept for auditing that the
/// descent guarantee's preconditions held.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZoneAudit {
    pub iteration: usize,
    pub cluster: usize,
    /// Radius of the convergent zone (how far the centroid moved).
    pub convergent_radius: f64,
    /// Distance from the real mean to the sampling ball's center.
    pub ball_center_offset: f64,
    pub ball_radius: f64,
    /// Distance from the real mean to the released centroid.
    pub hat_offset: f64,
}

/// Aim point from past knowledge only: reflect the previous centroid
/// through the current one (landing diametrically opposite on the
/// convergent-zone boundary), then swing it by a random angle drawn from
/// the rotation density, in the plane of a random orthogonal direction.
///
/// Consumes randomness in the order: angle, then orthogonal direction.
pub fn orientation_past<R: Rng + ?Sized>(
    s_prev: &Vector,
    s_cur: &Vector,
    rng: &mut R,
) -> Result<Vector> {
    let movement = s_cur.sub(s_prev);
    if movement.norm() == 0.0 {
        return Err(Error::Converged);
    }
    if s_cur.dim() == 1 {
        // No rotation plane exists on a line; keep the reflected point.
        return orientation_past_at(s_prev, s_cur, 0.0, None);
    }
    let gamma = TruncatedExpDensity::rotation_angle().sample(rng);
    let ortho = random_orthonormal(&movement, rng)?;
    orientation_past_at(s_prev, s_cur, gamma, Some(&ortho))
}

/// Deterministic core of `orientation_past` with the angle and plane
/// supplied by the caller (used directly by tests).
pub fn orientation_past_at(
    s_prev: &Vector,
    s_cur: &Vector,
    gamma: f64,
    ortho: Option<&Vector>,
) -> Result<Vector> {
    let movement = s_cur.sub(s_prev);
    if movement.norm() == 0.0 {
        return Err(Error::Converged);
    }
    let reflected = s_cur.add(&movement);
    match ortho {
        Some(o) => rotate_about(s_cur, &reflected, gamma, o),
        None => {
            debug_assert!(gamma == 0.0, "a rotation angle needs a rotation plane");
            Ok(reflected)
        }
    }
}

/// Aim point from future knowledge: run one extra assignment of the whole
/// dataset against the real means and return what cluster `i`'s mean
/// would become.  An emptied cluster aims at its current mean.
pub fn orientation_future(
    dataset: &Dataset,
    real_means: &[Vector],
    cluster: usize,
) -> Result<Vector> {
    if cluster >= real_means.len() {
        return Err(Error::ClusterIndexOutOfRange {
            index: cluster,
            k: real_means.len(),
        });
    }
    let next = assign(dataset, real_means);
    let members = dataset
        .points()
        .iter()
        .zip(&next)
        .filter(|(_, &a)| a == cluster)
        .map(|(x, _)| x);
    match mean(members) {
        Ok(m) => Ok(m),
        Err(Error::EmptySet) => Ok(real_means[cluster].clone()),
        Err(e) => Err(e),
    }
}

/// Place the sampling ball: its center sits a random fraction
/// lambda in (1/2, 1) of the way from `s_cur` to the aim point `x`, and
/// its radius is the remaining distance to `x`.
///
/// Consumes randomness in the order: fraction, then orthogonal direction.
pub fn build_sampling_zone<R: Rng + ?Sized>(
    s_cur: &Vector,
    x: &Vector,
    rng: &mut R,
) -> Result<SamplingZoneSpec> {
    if distance(s_cur, x)? == 0.0 {
        return Err(Error::Converged);
    }
    let lambda = TruncatedExpDensity::center_offset().sample(rng);
    let ortho = if s_cur.dim() == 1 {
        None
    } else {
        Some(random_orthonormal(&x.sub(s_cur), rng)?)
    };
    build_sampling_zone_at(s_cur, x, lambda, ortho)
}

/// Deterministic core of `build_sampling_zone` with the fraction and
/// frame orientation supplied by the caller.
pub fn build_sampling_zone_at(
    s_cur: &Vector,
    x: &Vector,
    lambda: f64,
    ortho: Option<Vector>,
) -> Result<SamplingZoneSpec> {
    let span = distance(s_cur, x)?;
    if span == 0.0 {
        return Err(Error::Converged);
    }
    if !(0.5 < lambda && lambda < 1.0) {
        return Err(Error::Config(format!(
            "ball-center fraction must lie in (1/2, 1), got {lambda}"
        )));
    }
    if let Some(o) = &ortho {
        if o.dim() != s_cur.dim() {
            return Err(Error::DimensionMismatch(s_cur.dim(), o.dim()));
        }
    }
    let direction = x.sub(s_cur);
    let center = s_cur.add(&direction.scale(lambda));
    let radius = distance(x, &center)?;
    Ok(SamplingZoneSpec {
        ball: Ball { center, radius },
        frame: SamplingFrame {
            origin: s_cur.clone(),
            axis: direction.scale(1.0 / span),
            ortho,
            span,
        },
    })
}

/// Draw a private centroid from the zone: lay a grid of cell centers
/// over (delta, alpha) in (0,1) x (-pi/2, pi/2), keep the grid points
/// that land strictly inside the ball, and select one by the exponential
/// mechanism over their scores.  Returns the point with its (delta,
/// alpha) pair.
///
/// On a line (no orthogonal direction) the angle axis degenerates; the
/// grid collapses to alpha = 0.
pub fn sample_private_centroid<R: Rng + ?Sized>(
    zone: &SamplingZoneSpec,
    epsilon: f64,
    grid: (usize, usize),
    rng: &mut R,
) -> Result<(Vector, f64, f64)> {
    let (n_delta, n_alpha) = grid;
    if n_delta < 16 || n_alpha < 16 {
        return Err(Error::Config(format!(
            "candidate grid must be at least 16x16, got {n_delta}x{n_alpha}"
        )));
    }
    let alphas: Vec<f64> = if zone.frame.ortho.is_none() {
        vec![0.0]
    } else {
        (0..n_alpha)
            .map(|m| {
                std::f64::consts::PI * ((m as f64 + 0.5) / n_alpha as f64)
                    - std::f64::consts::FRAC_PI_2
            })
            .collect()
    };
    let mut candidates = Vec::new();
    let mut scores = Vec::new();
    for j in 0..n_delta {
        let delta = (j as f64 + 0.5) / n_delta as f64;
        for &alpha in &alphas {
            let point = zone.frame.point_at(delta, alpha);
            if zone.ball.contains(&point)? {
                scores.push(score(delta, alpha));
                candidates.push((point, delta, alpha));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::GridTooCoarse);
    }
    let idx = exp_mechanism_index(&scores, epsilon, SCORE_SENSITIVITY, rng)?;
    Ok(candidates.swap_remove(idx))
}

/// Final release: per-cluster coordinate sums divided by noisy counts.
/// The divisor is clamped below at 1 and the output coordinates to
/// [0, 1] (the data is normalized); both clamps are post-processing.
pub fn finalize_laplace<R: Rng + ?Sized>(
    dataset: &Dataset,
    assignments: &[usize],
    k: usize,
    epsilon0: f64,
    rng: &mut R,
) -> Result<Vec<Vector>> {
    if !(epsilon0 > 0.0) {
        return Err(Error::NonPositiveScale(epsilon0));
    }
    let scale = local_sensitivity_count() / epsilon0;
    let noise: Vec<f64> = (0..k)
        .map(|_| laplace_sample(scale, rng))
        .collect::<Result<_>>()?;
    finalize_with_noise(dataset, assignments, k, &noise)
}

/// Deterministic core of `finalize_laplace` with the count noise supplied
/// by the caller (zero noise gives exact means of nonempty clusters).
pub fn finalize_with_noise(
    dataset: &Dataset,
    assignments: &[usize],
    k: usize,
    noise: &[f64],
) -> Result<Vec<Vector>> {
    if noise.len() != k {
        return Err(Error::Config(format!(
            "{} noise draws for {k} clusters",
            noise.len()
        )));
    }
    if assignments.len() != dataset.len() {
        return Err(Error::Config(format!(
            "{} assignments for {} points",
            assignments.len(),
            dataset.len()
        )));
    }
    let mut sums = vec![Vector::zeros(dataset.dim()); k];
    let mut counts = vec![0usize; k];
    for (x, &a) in dataset.points().iter().zip(assignments) {
        if a >= k {
            return Err(Error::ClusterIndexOutOfRange { index: a, k });
        }
        sums[a] = sums[a].add(x);
        counts[a] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .zip(noise)
        .map(|((sum, count), &eta)| {
            let divisor = (count as f64 + eta).max(1.0);
            Vector::new(
                sum.coords()
                    .iter()
                    .map(|c| (c / divisor).clamp(0.0, 1.0))
                    .collect(),
            )
        })
        .collect())
}
