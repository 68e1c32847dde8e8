//! Truncated exponential densities with a log-weight linear in the argument,
//! sampled by analytic inverse CDF.

use rand::Rng;

use crate::error::{Error, Result};

/// A density on [lo, hi] proportional to exp(intercept + slope·r).
///
/// Only linear exponents are supported, which keeps the CDF closed-form
/// invertible; the two densities the sampler actually needs are both of
/// this shape.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedExpDensity {
    lo: f64,
    hi: f64,
    slope: f64,
    intercept: f64,
}

impl TruncatedExpDensity {
    pub fn new(lo: f64, hi: f64, slope: f64, intercept: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Config(format!(
                "truncated density needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::Config("non-finite density exponent".into()));
        }
        Ok(TruncatedExpDensity {
            lo,
            hi,
            slope,
            intercept,
        })
    }

    /// Density of the perturbation rotation angle: proportional to
    /// exp(1 - 2r/π) on [0, π/2].  Small angles are favored, so the
    /// perturbed direction usually stays close to the line the centroids
    /// moved along.
    pub fn rotation_angle() -> Self {
        TruncatedExpDensity {
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
            slope: -2.0 / std::f64::consts::PI,
            intercept: 1.0,
        }
    }

    /// Density of the sampling-ball center's position along the segment
    /// from the current centroid to the aim point, as a fraction of the
    /// segment: proportional to exp(2 - 2r) on (1/2, 1).  Fractions near
    /// 1/2 are favored, which keeps the sampling ball large.
    pub fn center_offset() -> Self {
        TruncatedExpDensity {
            lo: 0.5,
            hi: 1.0,
            slope: -2.0,
            intercept: 2.0,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Exponent of the unnormalized density at `r`.
    pub fn log_weight(&self, r: f64) -> f64 {
        self.intercept + self.slope * r
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let s = self.slope;
        if s == 0.0 {
            return (x - self.lo) / (self.hi - self.lo);
        }
        ((s * x).exp() - (s * self.lo).exp()) / ((s * self.hi).exp() - (s * self.lo).exp())
    }

    /// Draw one value in [lo, hi]; exact endpoint hits are nudged inward
    /// by 1e-12 so open-interval callers still get strict membership.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let s = self.slope;
        let mut x = if s == 0.0 {
            self.lo + u * (self.hi - self.lo)
        } else {
            let w_lo = (s * self.lo).exp();
            let w_hi = (s * self.hi).exp();
            (w_lo + u * (w_hi - w_lo)).ln() / s
        };
        if x <= self.lo {
            x = self.lo + 1e-12;
        }
        if x >= self.hi {
            x = self.hi - 1e-12;
        }
        x
    }
}
