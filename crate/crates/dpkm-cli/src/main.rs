//! Command-line front end: single runs, seeded benchmark sweeps, and
//! the missing-record attack demo.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dpkm::clustering::{AlgoParams, Registry};
use dpkm::harness::report::{emit_plot_csv, emit_report, report_csv, report_json, ReportFormat};
use dpkm::harness::{draw_init, run_trials, DataSource, ExperimentConfig};
use dpkm::seed::derive_rng;

#[derive(Parser)]
#[command(
    name = "dpkm",
    version,
    about = "Differentially private k-means: runs, benchmarks, and the reconstruction attack demo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm once and print its result as JSON.
    Run(RunArgs),
    /// Benchmark the selected algorithms over seeded trials and emit a
    /// report.
    Compare(CompareArgs),
    /// Demonstrate reconstructing a removed record from released means.
    AttackDemo(AttackArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV dataset path (numeric cells; see --has-header /
    /// --drop-columns).
    #[arg(long, conflicts_with = "blobs")]
    data: Option<PathBuf>,
    /// Treat the first CSV row as a header.
    #[arg(long, default_value_t = false)]
    has_header: bool,
    /// 0-based label columns to drop from the CSV, comma-separated.
    #[arg(long, value_delimiter = ',')]
    drop_columns: Vec<usize>,
    /// Synthetic blob dataset "k_true,per_cluster,dim,spread[,seed]".
    #[arg(long)]
    blobs: Option<String>,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource, CliError> {
        match (&self.data, &self.blobs) {
            (Some(path), None) => Ok(DataSource::Csv {
                path: path.to_string_lossy().into_owned(),
                has_header: self.has_header,
                drop_columns: self.drop_columns.clone(),
            }),
            (None, Some(spec)) => parse_blobs(spec),
            (None, None) => Err(CliError::Usage(
                "one of --data or --blobs is required".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Algorithm: lloyd, dp (with --strategy), dp-posterior, dp-prior,
    /// laplace-uniform, or laplace-halving.
    #[arg(long)]
    algo: String,
    /// Strategy for --algo dp: posterior/past or prior/past-and-future.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    k: usize,
    /// Per-iteration budget of the convergent algorithms.
    #[arg(long, default_value_t = 0.5)]
    eps_iter: f64,
    /// Finalization budget of the convergent algorithms.
    #[arg(long, default_value_t = 0.5)]
    eps0: f64,
    /// Total budget handed to the schedule baselines.
    #[arg(long, default_value_t = 1.0)]
    eps_total: f64,
    #[arg(long, default_value_t = 10)]
    uniform_iterations: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Candidate grid "RADIALxANGULAR", at least 16x16.
    #[arg(long, default_value = "64x64")]
    grid: String,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 300)]
    trials: usize,
    /// Swept budget: "start:stop:step" or a single value.
    #[arg(long, default_value = "0.1:1.0:0.1")]
    eps: String,
    /// Pin the per-iteration budget instead of sweeping it.
    #[arg(long)]
    eps_iter: Option<f64>,
    /// Pin the finalization budget instead of sweeping it.
    #[arg(long)]
    eps0: Option<f64>,
    /// Comma-separated algorithms to benchmark (default: all).
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value = "64x64")]
    grid: String,
    #[arg(long, default_value_t = 10)]
    uniform_iterations: usize,
    #[arg(long)]
    threads: Option<usize>,
    /// Report format: json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plot-ready long-format CSV here.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Release budget; 0 demonstrates the noise-free attack only.
    #[arg(long, default_value_t = 0.5)]
    eps0: f64,
    #[arg(long, default_value_t = 100)]
    demos: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

/// Validation-shaped library errors map to usage failures; everything
/// else is a runtime failure.
fn classify(e: dpkm::Error) -> CliError {
    match e {
        dpkm::Error::Config(_) | dpkm::Error::TooManyClusters { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Runtime(other.into()),
    }
}

fn parse_blobs(spec: &str) -> Result<DataSource, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err(CliError::Usage(format!(
            "--blobs expects \"k_true,per_cluster,dim,spread[,seed]\", got '{spec}'"
        )));
    }
    let bad = |what: &str| CliError::Usage(format!("--blobs: cannot parse {what} in '{spec}'"));
    Ok(DataSource::Blobs {
        k_true: parts[0].parse().map_err(|_| bad("k_true"))?,
        per_cluster: parts[1].parse().map_err(|_| bad("per_cluster"))?,
        dim: parts[2].parse().map_err(|_| bad("dim"))?,
        spread: parts[3].parse().map_err(|_| bad("spread"))?,
        seed: match parts.get(4) {
            Some(s) => s.parse().map_err(|_| bad("seed"))?,
            None => 0,
        },
    })
}

fn parse_grid(spec: &str) -> Result<(usize, usize), CliError> {
    let mut it = spec.split('x');
    let parse = |part: Option<&str>| {
        part.and_then(|p| p.parse::<usize>().ok())
            .ok_or_else(|| CliError::Usage(format!("--grid expects \"NxM\", got '{spec}'")))
    };
    let rows = parse(it.next())?;
    let cols = parse(it.next())?;
    if it.next().is_some() {
        return Err(CliError::Usage(format!(
            "--grid expects \"NxM\", got '{spec}'"
        )));
    }
    Ok((rows, cols))
}

fn parse_eps_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--eps expects \"start:stop:step\" or a single positive value, got '{spec}'"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(start > 0.0) || !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let mut eps = Vec::new();
        let mut i = 0u32;
        loop {
            let value = start + step * f64::from(i);
            if value > stop + step * 1e-9 {
                break;
            }
            eps.push(value);
            i += 1;
        }
        Ok(eps)
    } else {
        let value: f64 = spec.parse().map_err(|_| bad())?;
        if !(value > 0.0) {
            return Err(bad());
        }
        Ok(vec![value])
    }
}

/// The environment variable wins over the flag when it is set.
fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("DPKM_SEED") {
        Ok(text) => text.parse().map_err(|_| {
            CliError::Usage(format!("DPKM_SEED must be an unsigned integer, got '{text}'"))
        }),
        Err(_) => Ok(flag),
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    Ok(())
}

fn write_or_print(payload: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, payload).map_err(|e| CliError::Runtime(e.into())),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

/// Resolve --algo/--strategy into a registry name.
fn canonical_algo(algo: &str, strategy: &Option<String>) -> Result<String, CliError> {
    let from_strategy = |s: &str| -> Result<String, CliError> {
        let parsed = dpkm::clustering::Strategy::parse(s).map_err(classify)?;
        Ok(match parsed.label() {
            "posterior" => "dp-posterior".to_string(),
            _ => "dp-prior".to_string(),
        })
    };
    match (algo, strategy) {
        ("dp", Some(s)) => from_strategy(s),
        ("dp", None) => Err(CliError::Usage(
            "--algo dp needs --strategy (posterior or prior)".into(),
        )),
        (name, Some(s)) if name == "dp-posterior" || name == "dp-prior" => {
            let implied = from_strategy(s)?;
            if implied != name {
                return Err(CliError::Usage(format!(
                    "--algo {name} contradicts --strategy {s}"
                )));
            }
            Ok(name.to_string())
        }
        (name, Some(_)) => Err(CliError::Usage(format!(
            "--strategy only applies to the dp algorithms, not {name}"
        ))),
        (name, None) => Ok(name.to_string()),
    }
}

/// JSON shape of a single `run` invocation.
#[derive(Serialize)]
struct RunOutput {
    algorithm: String,
    k: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    epsilon_total: f64,
    /// Absolute clustering objective of the released centroids.
    cost: f64,
    prenoise_cost: f64,
    centroids: Vec<dpkm::geometry::Vector>,
    cost_trace: Vec<f64>,
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    configure_threads(args.threads)?;
    let seed = effective_seed(args.seed)?;
    let name = canonical_algo(&args.algo, &args.strategy)?;
    let grid = parse_grid(&args.grid)?;
    let source = args.data.source()?;
    let dataset = source.load().map_err(classify)?;

    let params = AlgoParams {
        eps_iter: args.eps_iter,
        eps0: args.eps0,
        eps_total: args.eps_total,
        tol: args.tol,
        max_iter: args.max_iter,
        grid,
        uniform_iterations: args.uniform_iterations,
        zero_noise: false,
    };
    let registry = Registry::standard();
    let algo = registry.build(&name, &params).map_err(classify)?;

    if args.k < 1 || args.k > dataset.len() {
        return Err(CliError::Usage(format!(
            "k must be between 1 and the dataset size {}, got {}",
            dataset.len(),
            args.k
        )));
    }
    let init = draw_init(&dataset, args.k, seed, 0);
    let mut rng = derive_rng(seed, &name, &[0]);
    let record = algo.run(&dataset, &init, &mut rng).map_err(classify)?;

    let output = RunOutput {
        algorithm: record.algorithm,
        k: args.k,
        seed,
        iterations: record.iterations,
        converged: record.converged,
        epsilon_total: record.eps_total,
        cost: record.final_cost,
        prenoise_cost: record.prenoise_cost,
        centroids: record.final_centroids,
        cost_trace: record.cost_trace,
    };
    let payload =
        serde_json::to_string_pretty(&output).map_err(|e| CliError::Runtime(e.into()))?;
    write_or_print(&payload, &args.out)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    configure_threads(args.threads)?;
    let seed = effective_seed(args.seed)?;
    let format = ReportFormat::parse(&args.format).map_err(classify)?;
    let source = args.data.source()?;

    let mut config = ExperimentConfig::new(source, args.k);
    config.trials = args.trials;
    config.eps_list = parse_eps_list(&args.eps)?;
    config.eps_iter = args.eps_iter;
    config.eps0 = args.eps0;
    if let Some(algos) = &args.algos {
        config.algorithms = algos.clone();
    }
    config.master_seed = seed;
    config.tol = args.tol;
    config.max_iter = args.max_iter;
    config.grid = parse_grid(&args.grid)?;
    config.uniform_iterations = args.uniform_iterations;

    let report = run_trials(&config).map_err(classify)?;

    match &args.out {
        Some(path) => emit_report(&report, format, path).map_err(classify)?,
        None => {
            let payload = match format {
                ReportFormat::Json => report_json(&report).map_err(classify)?,
                ReportFormat::Csv => report_csv(&report).map_err(classify)?,
            };
            println!("{payload}");
        }
    }
    if let Some(path) = &args.plot_out {
        emit_plot_csv(&report, path).map_err(classify)?;
    }
    Ok(())
}

fn cmd_attack_demo(args: &AttackArgs) -> Result<(), CliError> {
    let seed = effective_seed(args.seed)?;
    let source = args.data.source()?;
    let dataset = source.load().map_err(classify)?;
    let mut rng = derive_rng(seed, "attack-demo", &[]);
    let report =
        dpkm::attack::demo(&dataset, args.k, args.eps0, args.demos, &mut rng).map_err(classify)?;
    let payload =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.into()))?;
    write_or_print(&payload, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::AttackDemo(args) => cmd_attack_demo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
