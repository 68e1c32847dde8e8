//! Privacy-budget bookkeeping for an iterative release.
//!
//! Each sampled iteration spends, in the worst case over clusters, the
//! largest per-cluster budget it used; the final noisy release spends its
//! own budget on top.  The total is what the whole run is charged.

use serde::{Deserialize, Serialize};

/// Local sensitivity of a counting query: adding or removing one record
/// changes a count by exactly 1.  This is the Δf behind the final-output
/// Laplace scale 1/ε₀.
pub fn local_sensitivity_count() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetLedger {
    /// Budget of the final noisy-count release (0 when that step is skipped).
    pub eps_final: f64,
    /// Per-iteration, per-cluster budgets, in iteration order.
    pub per_iteration: Vec<Vec<f64>>,
}

impl BudgetLedger {
    pub fn new(eps_final: f64) -> Self {
        debug_assert!(eps_final >= 0.0);
        BudgetLedger {
            eps_final,
            per_iteration: Vec::new(),
        }
    }

    pub fn push_iteration(&mut self, eps_per_cluster: Vec<f64>) {
        debug_assert!(!eps_per_cluster.is_empty());
        debug_assert!(eps_per_cluster.iter().all(|&e| e > 0.0));
        self.per_iteration.push(eps_per_cluster);
    }

    pub fn iterations(&self) -> usize {
        self.per_iteration.len()
    }

    /// Total budget spent: ε₀ plus, per iteration, the largest per-cluster
    /// entry.  Accumulated in iteration order on the stored values, with
    /// no rearrangement, so callers can reason about bitwise equality.
    pub fn total(&self) -> f64 {
        self.per_iteration.iter().fold(self.eps_final, |acc, row| {
            acc + row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        })
    }
}
