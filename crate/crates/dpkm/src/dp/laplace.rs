use rand::Rng;

use crate::error::{Error, Result};

/// One draw from Laplace(0, scale), via inverse CDF.
///
/// Mean 0, variance 2·scale², mean absolute value = scale.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::NonPositiveScale(scale));
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    // 1 - 2|u| can hit exact zero only on the single value u = -0.5;
    // clamp so the log stays finite.
    let inner = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    Ok(-scale * u.signum() * inner.ln())
}
