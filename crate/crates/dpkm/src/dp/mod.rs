//! Differential-privacy primitives: noise, densities, selection, accounting.

mod laplace;
mod ledger;
mod mechanism;
mod truncated;

pub use laplace::laplace_sample;
pub use ledger::{local_sensitivity_count, BudgetLedger};
pub use mechanism::{exp_mechanism_index, exp_mechanism_sample, ScoredCandidate};
pub use truncated::TruncatedExpDensity;
