//! Exponential mechanism over a finite candidate list.

use rand::Rng;

use crate::error::{Error, Result};

/// A candidate output together with its utility score.
#[derive(Debug, Clone)]
pub struct ScoredCandidate<T> {
    pub payload: T,
    pub score: f64,
}

/// Pick an index with probability proportional to
/// exp(epsilon·score/(2·delta_q)).
///
/// The maximum score is subtracted before exponentiating, so the weights
/// stay in (0, 1] no matter how large epsilon·score gets; the selection
/// probabilities are unchanged by that shift.
pub fn exp_mechanism_index<R: Rng + ?Sized>(
    scores: &[f64],
    epsilon: f64,
    delta_q: f64,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::NoCandidates);
    }
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!(
            "exponential mechanism needs epsilon > 0, got {epsilon}"
        )));
    }
    if !(delta_q > 0.0) {
        return Err(Error::Config(format!(
            "exponential mechanism needs sensitivity > 0, got {delta_q}"
        )));
    }
    debug_assert!(scores.iter().all(|s| s.is_finite()));

    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rate = epsilon / (2.0 * delta_q);
    let weights: Vec<f64> = scores.iter().map(|q| (rate * (q - best)).exp()).collect();
    let total: f64 = weights.iter().sum();

    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    // Rounding can leave `target` a hair past the accumulated total; the
    // last candidate with nonzero weight takes the remainder.
    Ok(weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
}

/// As `exp_mechanism_index`, returning the chosen candidate.
pub fn exp_mechanism_sample<'a, T, R: Rng + ?Sized>(
    candidates: &'a [ScoredCandidate<T>],
    epsilon: f64,
    delta_q: f64,
    rng: &mut R,
) -> Result<&'a ScoredCandidate<T>> {
    let scores: Vec<f64> = candidates.iter().map(|c| c.score).collect();
    let idx = exp_mechanism_index(&scores, epsilon, delta_q, rng)?;
    Ok(&candidates[idx])
}
