//! Name-keyed registry of clustering algorithms.
//!
//! Every engine sits behind the same object-safe trait, so the harness
//! and CLI select algorithms by string at runtime and treat their
//! results uniformly.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    assign, baseline_laplace, cost, dp_kmeans, lloyd, BaselineConfig, Dataset, DpConfig, Schedule,
    Strategy, ZoneAudit,
};
use crate::dp::BudgetLedger;
use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Uniform result shape across all registered algorithms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub final_centroids: Vec<Vector>,
    pub prenoise_centroids: Vec<Vector>,
    /// Lloyd iterations, private-draw iterations, or schedule length,
    /// depending on the algorithm.
    pub iterations: usize,
    pub converged: bool,
    /// Objective of the released centroids under a fresh assignment.
    pub final_cost: f64,
    /// Same, for the centroids before finalization noise.
    pub prenoise_cost: f64,
    /// Total privacy budget spent (0 for the noise-free reference).
    pub eps_total: f64,
    pub cost_trace: Vec<f64>,
    pub ledger: Option<BudgetLedger>,
    pub audit: Vec<ZoneAudit>,
}

/// A clustering algorithm selectable by name at runtime.
pub trait Clusterer: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(
        &self,
        dataset: &Dataset,
        init_centroids: &[Vector],
        rng: &mut dyn RngCore,
    ) -> Result<RunRecord>;
}

/// Everything any of the registered algorithms might need; each factory
/// reads its own slice of it.
#[derive(Debug, Clone)]
pub struct AlgoParams {
    pub eps_iter: f64,
    pub eps0: f64,
    /// Total budget handed to the schedule baselines.
    pub eps_total: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub grid: (usize, usize),
    /// Iteration count of the uniform schedule.
    pub uniform_iterations: usize,
    pub zero_noise: bool,
}

impl Default for AlgoParams {
    fn default() -> Self {
        let dp = DpConfig::default();
        AlgoParams {
            eps_iter: dp.eps_iter,
            eps0: dp.eps0,
            eps_total: 1.0,
            tol: dp.tol,
            max_iter: dp.max_iter,
            grid: dp.grid,
            uniform_iterations: 10,
            zero_noise: false,
        }
    }
}

impl AlgoParams {
    fn dp_config(&self) -> DpConfig {
        DpConfig {
            eps_iter: self.eps_iter,
            eps0: self.eps0,
            tol: self.tol,
            max_iter: self.max_iter,
            grid: self.grid,
            zero_noise: self.zero_noise,
        }
    }
}

fn fresh_cost(dataset: &Dataset, centroids: &[Vector]) -> Result<f64> {
    let assignments = assign(dataset, centroids);
    cost(dataset, centroids, &assignments)
}

struct LloydClusterer {
    max_iter: usize,
}

impl Clusterer for LloydClusterer {
    fn name(&self) -> &'static str {
        "lloyd"
    }

    fn run(
        &self,
        dataset: &Dataset,
        init_centroids: &[Vector],
        _rng: &mut dyn RngCore,
    ) -> Result<RunRecord> {
        let state = lloyd(dataset, init_centroids, self.max_iter)?;
        let final_cost = fresh_cost(dataset, &state.centroids)?;
        Ok(RunRecord {
            algorithm: self.name().to_string(),
            prenoise_centroids: state.centroids.clone(),
            final_centroids: state.centroids,
            iterations: state.iteration,
            converged: state.converged,
            final_cost,
            prenoise_cost: final_cost,
            eps_total: 0.0,
            cost_trace: state.cost_trace,
            ledger: None,
            audit: Vec::new(),
        })
    }
}

struct DpClusterer {
    strategy: Strategy,
    config: DpConfig,
}

impl Clusterer for DpClusterer {
    fn name(&self) -> &'static str {
        match self.strategy {
            Strategy::Past => "dp-posterior",
            Strategy::PastAndFuture => "dp-prior",
        }
    }

    fn run(
        &self,
        dataset: &Dataset,
        init_centroids: &[Vector],
        rng: &mut dyn RngCore,
    ) -> Result<RunRecord> {
        let result = dp_kmeans(dataset, self.strategy, init_centroids, &self.config, rng)?;
        Ok(RunRecord {
            algorithm: self.name().to_string(),
            final_cost: fresh_cost(dataset, &result.final_centroids)?,
            prenoise_cost: fresh_cost(dataset, &result.prenoise_centroids)?,
            eps_total: result.ledger.total(),
            final_centroids: result.final_centroids,
            prenoise_centroids: result.prenoise_centroids,
            iterations: result.iterations,
            converged: result.converged,
            cost_trace: result.cost_trace,
            ledger: Some(result.ledger),
            audit: result.audit,
        })
    }
}

struct BaselineClusterer {
    schedule: Schedule,
    config: BaselineConfig,
}

impl Clusterer for BaselineClusterer {
    fn name(&self) -> &'static str {
        match self.schedule {
            Schedule::Uniform(_) => "laplace-uniform",
            Schedule::Halving => "laplace-halving",
        }
    }

    fn run(
        &self,
        dataset: &Dataset,
        init_centroids: &[Vector],
        rng: &mut dyn RngCore,
    ) -> Result<RunRecord> {
        let result = baseline_laplace(dataset, init_centroids, &self.config, rng)?;
        let final_cost = fresh_cost(dataset, &result.final_centroids)?;
        Ok(RunRecord {
            algorithm: self.name().to_string(),
            final_cost,
            prenoise_cost: final_cost,
            eps_total: result.ledger.total(),
            final_centroids: result.final_centroids,
            prenoise_centroids: result.prenoise_centroids,
            iterations: result.iterations,
            converged: result.converged,
            cost_trace: result.cost_trace,
            ledger: Some(result.ledger),
            audit: result.audit,
        })
    }
}

type Factory = fn(&AlgoParams) -> Box<dyn Clusterer>;

/// The built-in algorithms, constructible by name with a parameter bag.
pub struct Registry {
    entries: Vec<(&'static str, Factory)>,
}

impl Registry {
    pub fn standard() -> Self {
        Registry {
            entries: vec![
                ("lloyd", |p| {
                    Box::new(LloydClusterer {
                        max_iter: p.max_iter,
                    })
                }),
                ("dp-posterior", |p| {
                    Box::new(DpClusterer {
                        strategy: Strategy::Past,
                        config: p.dp_config(),
                    })
                }),
                ("dp-prior", |p| {
                    Box::new(DpClusterer {
                        strategy: Strategy::PastAndFuture,
                        config: p.dp_config(),
                    })
                }),
                ("laplace-uniform", |p| {
                    Box::new(BaselineClusterer {
                        schedule: Schedule::Uniform(p.uniform_iterations),
                        config: BaselineConfig {
                            eps_total: p.eps_total,
                            schedule: Schedule::Uniform(p.uniform_iterations),
                            zero_noise: p.zero_noise,
                        },
                    })
                }),
                ("laplace-halving", |p| {
                    Box::new(BaselineClusterer {
                        schedule: Schedule::Halving,
                        config: BaselineConfig {
                            eps_total: p.eps_total,
                            schedule: Schedule::Halving,
                            zero_noise: p.zero_noise,
                        },
                    })
                }),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(name, _)| *name).collect()
    }

    pub fn build(&self, name: &str, params: &AlgoParams) -> Result<Box<dyn Clusterer>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, factory)| factory(params))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }
}
