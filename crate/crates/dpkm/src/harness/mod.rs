//! Seeded multi-trial benchmark runner.
//!
//! Every trial draws one shared set of initial centroids, runs the
//! noise-free reference and the configured algorithms from it, and
//! scores three things: the final cost normalized by the reference
//! cost, whether the pre-noise result lands within 1% of the reference
//! (the "match"), and how many iterations the private runs took
//! relative to the reference.

pub mod data;
pub mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{AlgoParams, Dataset, Registry, RunRecord};
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::seed::derive_rng;

/// Where the benchmark dataset comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum DataSource {
    Csv {
        path: String,
        has_header: bool,
        drop_columns: Vec<usize>,
    },
    Blobs {
        k_true: usize,
        per_cluster: usize,
        dim: usize,
        spread: f64,
        seed: u64,
    },
}

impl DataSource {
    /// Load and normalize to the unit box.  (Blob data is generated
    /// pre-normalized; normalizing again is the identity.)
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv {
                path,
                has_header,
                drop_columns,
            } => Ok(data::normalize_unit_box(&data::load_csv(
                std::path::Path::new(path),
                *has_header,
                drop_columns,
            )?)),
            DataSource::Blobs {
                k_true,
                per_cluster,
                dim,
                spread,
                seed,
            } => data::synthetic_blobs(*k_true, *per_cluster, *dim, *spread, *seed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub k: usize,
    pub trials: usize,
    /// Swept per-step privacy budgets.  Each value is used as both the
    /// per-iteration budget and the finalization budget of the private
    /// algorithms unless the overrides below pin one of them.
    pub eps_list: Vec<f64>,
    pub eps_iter: Option<f64>,
    pub eps0: Option<f64>,
    /// Registry names to run and report, in report order.
    pub algorithms: Vec<String>,
    pub master_seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub grid: (usize, usize),
    pub uniform_iterations: usize,
    /// Test hook: disable all noise injection everywhere.
    #[serde(default)]
    pub zero_noise: bool,
}

impl ExperimentConfig {
    pub fn new(source: DataSource, k: usize) -> Self {
        ExperimentConfig {
            source,
            k,
            trials: 300,
            eps_list: (1..=10).map(|i| i as f64 / 10.0).collect(),
            eps_iter: None,
            eps0: None,
            algorithms: Registry::standard()
                .names()
                .into_iter()
                .map(str::to_string)
                .collect(),
            master_seed: 42,
            tol: 1e-4,
            max_iter: 200,
            grid: (64, 64),
            uniform_iterations: 10,
            zero_noise: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.eps_list.is_empty() {
            return Err(Error::Config("the epsilon list must not be empty".into()));
        }
        for &eps in &self.eps_list {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::Config(format!(
                    "epsilon values must be positive and finite, got {eps}"
                )));
            }
        }
        for (label, value) in [("eps_iter", self.eps_iter), ("eps0", self.eps0)] {
            if let Some(v) = value {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!(
                        "{label} override must be positive and finite, got {v}"
                    )));
                }
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        let known = Registry::standard().names();
        for name in &self.algorithms {
            if !known.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown algorithm '{name}' (known: {})",
                    known.join(", ")
                )));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One algorithm's outcome in one trial at one swept epsilon.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub algorithm: String,
    /// The swept per-step budget this row was run at.
    pub epsilon: f64,
    /// Realized total spend (from the run's ledger; 0 for the
    /// noise-free reference).
    pub eps_total: f64,
    /// Final cost divided by the same-init reference cost.
    pub normalized_cost: f64,
    /// Whether the pre-noise cost is within 1% of the reference.
    pub matched: bool,
    pub iterations: usize,
    pub lloyd_iterations: usize,
}

/// Per-(algorithm, epsilon) means over all trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub mean_normalized_cost: f64,
    /// Fraction of trials whose pre-noise result matched the
    /// reference; always in [0,1].
    pub convergence_degree: f64,
    pub mean_iterations: f64,
    pub mean_lloyd_iterations: f64,
    /// Mean private iterations over mean reference iterations.
    pub iteration_ratio: f64,
    pub mean_eps_total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Whether a pre-noise cost is within 1% of the reference cost
/// (inclusive endpoints).  A zero reference cost matches only a zero
/// cost.
pub fn match_flag(dp_prenoise_cost: f64, lloyd_cost: f64) -> bool {
    if lloyd_cost == 0.0 {
        dp_prenoise_cost == 0.0
    } else {
        let ratio = dp_prenoise_cost / lloyd_cost;
        (0.99..=1.01).contains(&ratio)
    }
}

fn normalized(cost: f64, lloyd_cost: f64) -> f64 {
    if lloyd_cost == 0.0 {
        if cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        cost / lloyd_cost
    }
}

/// Draw the trial's shared initial centroids: k distinct dataset
/// points, from a stream keyed by the trial index alone so every
/// algorithm starts identically.
pub fn draw_init(dataset: &Dataset, k: usize, master_seed: u64, trial: usize) -> Vec<Vector> {
    let mut rng = derive_rng(master_seed, "init", &[trial as u64]);
    rand::seq::index::sample(&mut rng, dataset.len(), k)
        .iter()
        .map(|i| dataset.point(i).clone())
        .collect()
}

fn run_one_trial(
    config: &ExperimentConfig,
    dataset: &Dataset,
    registry: &Registry,
    trial: usize,
) -> Result<Vec<TrialRow>> {
    let init = draw_init(dataset, config.k, config.master_seed, trial);

    // Noise-free reference; computed even when not reported because it
    // anchors normalization and the iteration ratio.
    let lloyd_record = {
        let params = AlgoParams {
            max_iter: config.max_iter,
            ..AlgoParams::default()
        };
        let algo = registry.build("lloyd", &params)?;
        let mut rng = derive_rng(config.master_seed, "lloyd", &[trial as u64]);
        algo.run(dataset, &init, &mut rng)?
    };

    let dp_names = ["dp-posterior", "dp-prior"];
    let mut rows = Vec::new();
    for (eps_idx, &eps) in config.eps_list.iter().enumerate() {
        let dp_params = AlgoParams {
            eps_iter: config.eps_iter.unwrap_or(eps),
            eps0: config.eps0.unwrap_or(eps),
            tol: config.tol,
            max_iter: config.max_iter,
            grid: config.grid,
            zero_noise: config.zero_noise,
            ..AlgoParams::default()
        };

        let mut records: Vec<(String, RunRecord)> = Vec::new();
        let mut dp_total: Option<f64> = None;
        for name in &config.algorithms {
            if dp_names.contains(&name.as_str()) {
                let algo = registry.build(name, &dp_params)?;
                let mut rng =
                    derive_rng(config.master_seed, name, &[trial as u64, eps_idx as u64]);
                let record = algo.run(dataset, &init, &mut rng)?;
                dp_total = Some(dp_total.unwrap_or(f64::NEG_INFINITY).max(record.eps_total));
                records.push((name.clone(), record));
            }
        }
        // Budget parity: the schedule baselines receive the realized
        // total of the convergent runs (the larger when both ran), or
        // the swept value itself when no convergent run is selected.
        let baseline_params = AlgoParams {
            eps_total: dp_total.unwrap_or(eps),
            uniform_iterations: config.uniform_iterations,
            ..dp_params.clone()
        };
        for name in &config.algorithms {
            match name.as_str() {
                "lloyd" => records.push((name.clone(), lloyd_record.clone())),
                "laplace-uniform" | "laplace-halving" => {
                    let algo = registry.build(name, &baseline_params)?;
                    let mut rng =
                        derive_rng(config.master_seed, name, &[trial as u64, eps_idx as u64]);
                    records.push((name.clone(), algo.run(dataset, &init, &mut rng)?));
                }
                _ => {}
            }
        }

        for name in &config.algorithms {
            let record = &records
                .iter()
                .find(|(n, _)| n == name)
                .expect("every selected algorithm was run")
                .1;
            let (normalized_cost, matched) = if name == "lloyd" {
                (1.0, true)
            } else {
                (
                    normalized(record.final_cost, lloyd_record.final_cost),
                    match_flag(record.prenoise_cost, lloyd_record.final_cost),
                )
            };
            rows.push(TrialRow {
                trial,
                algorithm: name.clone(),
                epsilon: eps,
                eps_total: record.eps_total,
                normalized_cost,
                matched,
                iterations: record.iterations,
                lloyd_iterations: lloyd_record.iterations,
            });
        }
    }
    Ok(rows)
}

pub(crate) fn aggregate(config: &ExperimentConfig, trials: &[TrialRow]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for name in &config.algorithms {
        for &eps in &config.eps_list {
            let group: Vec<&TrialRow> = trials
                .iter()
                .filter(|r| r.algorithm == *name && r.epsilon == eps)
                .collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&TrialRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_iterations = mean(&|r| r.iterations as f64);
            let mean_lloyd_iterations = mean(&|r| r.lloyd_iterations as f64);
            rows.push(AggregateRow {
                algorithm: name.clone(),
                epsilon: eps,
                mean_normalized_cost: mean(&|r| r.normalized_cost),
                convergence_degree: mean(&|r| if r.matched { 1.0 } else { 0.0 }),
                mean_iterations,
                mean_lloyd_iterations,
                iteration_ratio: mean_iterations / mean_lloyd_iterations,
                mean_eps_total: mean(&|r| r.eps_total),
            });
        }
    }
    rows
}

/// Run the whole experiment: `trials` independent seeded trials, each
/// covering every configured algorithm at every swept epsilon.  Trials
/// run in parallel; the report is assembled in trial order, so output
/// does not depend on scheduling.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialReport> {
    config.validate()?;
    let dataset = config.source.load()?;
    if config.k > dataset.len() {
        return Err(Error::TooManyClusters {
            k: config.k,
            n: dataset.len(),
        });
    }
    let registry = Registry::standard();
    let per_trial: Vec<Vec<TrialRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_one_trial(config, &dataset, &registry, trial))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<TrialRow> = per_trial.into_iter().flatten().collect();
    let aggregates = aggregate(config, &trials);
    Ok(TrialReport {
        config: config.clone(),
        trials,
        aggregates,
    })
}
