//! Points, distances, rotations, and the balls these algorithms sample from.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in d-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Euclidean distance between two points of the same dimension.
pub fn distance(u: &Vector, v: &Vector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    let sq: f64 = u
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq.sqrt())
}

/// Coordinate-wise mean of a non-empty set of points.
pub fn mean<'a, I>(points: I) -> Result<Vector>
where
    I: IntoIterator<Item = &'a Vector>,
{
    let mut iter = points.into_iter();
    let first = iter.next().ok_or(Error::EmptySet)?;
    let mut sum = first.clone();
    let mut count = 1usize;
    for p in iter {
        if p.dim() != sum.dim() {
            return Err(Error::DimensionMismatch(sum.dim(), p.dim()));
        }
        sum = sum.add(p);
        count += 1;
    }
    Ok(sum.scale(1.0 / count as f64))
}

/// A unit vector orthogonal to `axis`, drawn uniformly over all such
/// directions: sample a standard Gaussian, project out the component
/// along `axis`, and normalize.  Retries on the (measure-zero) event
/// that the sample is numerically parallel to the axis.
pub fn random_orthonormal<R: Rng + ?Sized>(axis: &Vector, rng: &mut R) -> Result<Vector> {
    if axis.dim() < 2 {
        return Err(Error::DegenerateDimension);
    }
    let axis_norm = axis.norm();
    debug_assert!(axis_norm > 0.0, "axis must be nonzero");
    let unit_axis = axis.scale(1.0 / axis_norm);
    loop {
        let gauss: Vec<f64> = (0..axis.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let g = Vector::new(gauss);
        let residual = g.sub(&unit_axis.scale(g.dot(&unit_axis)));
        let norm = residual.norm();
        if norm > 1e-12 {
            return Ok(residual.scale(1.0 / norm));
        }
    }
}

/// Rotate `point` about `center` by `angle` radians, moving within the
/// plane spanned by the radial direction and `ortho`.
///
/// `ortho` must be a unit vector orthogonal to `point - center`; positive
/// angles rotate toward it.  The radius is preserved exactly up to
/// rounding.
pub fn rotate_about(center: &Vector, point: &Vector, angle: f64, ortho: &Vector) -> Result<Vector> {
    if center.dim() != point.dim() {
        return Err(Error::DimensionMismatch(center.dim(), point.dim()));
    }
    let radial = point.sub(center);
    let radius = radial.norm();
    if radius == 0.0 {
        return Err(Error::ZeroRadius);
    }
    debug_assert!((ortho.norm() - 1.0).abs() < 1e-9, "ortho must be unit");
    debug_assert!(
        radial.dot(ortho).abs() / radius < 1e-9,
        "ortho must be orthogonal to the radial direction"
    );
    let rotated = radial
        .scale(angle.cos())
        .add(&ortho.scale(radius * angle.sin()));
    Ok(center.add(&rotated))
}

/// An open ball: membership is strict inequality on the radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, point: &Vector) -> Result<bool> {
        Ok(distance(&self.center, point)? < self.radius)
    }
}

/// The open ball around the current centroid whose radius is the last
/// movement distance.  Any point strictly inside it is closer to the
/// current centroid than the previous centroid was, which is what makes
/// a perturbed centroid drawn from it keep the objective falling.
pub fn convergent_zone(s_prev: &Vector, s_cur: &Vector) -> Result<Ball> {
    let radius = distance(s_prev, s_cur)?;
    if radius == 0.0 {
        return Err(Error::Converged);
    }
    Ok(Ball {
        center: s_cur.clone(),
        radius,
    })
}

/// Polar coordinates for sampling inside a ball: points are addressed as
/// `origin + delta * span * (cos(alpha) * axis + sin(alpha) * ortho)`
/// with `delta` in [0, 1) and `alpha` in (-pi/2, pi/2).
///
/// `axis` and `ortho` are orthonormal.  In one dimension no orthogonal
/// direction exists, so `ortho` is absent and `alpha` must be zero.
#[derive(Debug, Clone)]
pub struct SamplingFrame {
    pub origin: Vector,
    pub axis: Vector,
    pub ortho: Option<Vector>,
    /// Distance from the origin to the point the frame is aimed at.
    pub span: f64,
}

impl SamplingFrame {
    pub fn point_at(&self, delta: f64, alpha: f64) -> Vector {
        let along = self.axis.scale(delta * self.span * alpha.cos());
        match &self.ortho {
            Some(o) => along.add(&o.scale(delta * self.span * alpha.sin())).add(&self.origin),
            None => {
                debug_assert!(alpha == 0.0, "alpha must be zero in one dimension");
                along.add(&self.origin)
            }
        }
    }
}
