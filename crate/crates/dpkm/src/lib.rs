//! Differentially private k-means clustering.
//!
//! The centerpiece is a k-means variant that perturbs each iteration's
//! centroids with an exponential-mechanism draw confined to a ball in
//! which the clustering objective is guaranteed to keep falling, so the
//! algorithm converges like ordinary Lloyd iteration while every
//! intermediate release is differentially private.  Around it sit the
//! DP primitives (Laplace noise, truncated-exponential samplers, budget
//! ledger), plain Lloyd and Laplace-schedule baselines for comparison, a
//! seeded benchmark harness, and a small demo of the mean-reconstruction
//! attack that motivates perturbing intermediate centroids at all.

pub mod attack;
pub mod clustering;
pub mod dp;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod seed;

pub use error::{Error, Result};
