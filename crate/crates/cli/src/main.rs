use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gridgp_cli::commands::{
    cmd_benchmark, cmd_predict, cmd_train, cmd_validate, BenchmarkOptions, PredictOptions,
    TrainOptions, ValidateOptions,
};
use gridgp_cli::config::ConfigFile;
use gridgp_cli::error::CliError;

/// Exact Gaussian-process regression on factorial (grid) designs.
#[derive(Parser)]
#[command(name = "gridgp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit hyperparameters on a dataset and write a model file.
    Train(TrainArgs),
    /// Predict at query points from a saved model.
    Predict(PredictArgs),
    /// Run the benchmark suite and write records and profiles.
    Benchmark(BenchmarkArgs),
    /// Check a dataset file and report its grid structure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset file (.json native format, .csv import).
    #[arg(long)]
    data: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// TOML file mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Beta-prior regularization on the inverse length-scales.
    #[arg(long, value_parser = ["on", "off"])]
    prior: Option<String>,
    /// Beta shape parameter alpha (> 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Beta shape parameter beta (> 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Lower length-scale bound multiplier on the minimum spacing.
    #[arg(long)]
    ck: Option<f64>,
    /// Upper length-scale bound multiplier on the maximum spacing.
    #[arg(long = "Ck")]
    big_ck: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Start from the degenerate end of the feasible box (stress test).
    #[arg(long, default_value_t = false)]
    adversarial_init: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// CSV of query points, d columns per row (header optional).
    #[arg(long)]
    points: PathBuf,
    /// Output CSV of predictions.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Add a posterior-variance column.
    #[arg(long, default_value_t = false)]
    variance: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// "builtin", "smoke", or a path to a JSON suite description.
    #[arg(long)]
    suite: Option<String>,
    /// Comma-separated list: tensorGP, tensorGP-reg, denseGP.
    #[arg(long)]
    algorithms: Option<String>,
    /// Output directory for the CSV files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Held-out test points per problem.
    #[arg(long)]
    ntest: Option<usize>,
    /// Worker threads; keep 1 when timings matter.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Largest N the dense baseline attempts.
    #[arg(long)]
    dense_cap: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Skip the runtime-vs-N table.
    #[arg(long, default_value_t = false)]
    no_runtime_table: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    data: PathBuf,
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Train(a) => {
            let file = ConfigFile::load(a.config.as_deref())?;
            let defaults = TrainOptions::default();
            let prior = a
                .prior
                .or(file.train.prior)
                .map(|s| s == "on")
                .unwrap_or(defaults.prior);
            let opts = TrainOptions {
                data: a.data,
                out: a.out,
                prior,
                alpha: a.alpha.or(file.train.alpha).unwrap_or(defaults.alpha),
                beta: a.beta.or(file.train.beta).unwrap_or(defaults.beta),
                ck: a.ck.or(file.train.ck).unwrap_or(defaults.ck),
                big_ck: a.big_ck.or(file.train.big_ck).unwrap_or(defaults.big_ck),
                restarts: a.restarts.or(file.train.restarts).unwrap_or(defaults.restarts),
                max_iters: a
                    .max_iters
                    .or(file.train.max_iters)
                    .unwrap_or(defaults.max_iters),
                grad_tol: a.grad_tol.or(file.train.grad_tol).unwrap_or(defaults.grad_tol),
                seed: a.seed.or(file.train.seed).unwrap_or(defaults.seed),
                adversarial_init: a.adversarial_init
                    || file.train.adversarial_init.unwrap_or(false),
            };
            cmd_train(&opts)
        }
        Command::Predict(a) => {
            let file = ConfigFile::load(a.config.as_deref())?;
            let opts = PredictOptions {
                model: a.model,
                points: a.points,
                out: a.out,
                variance: a.variance || file.predict.variance.unwrap_or(false),
            };
            cmd_predict(&opts)
        }
        Command::Benchmark(a) => {
            let file = ConfigFile::load(a.config.as_deref())?;
            let defaults = BenchmarkOptions::default();
            let opts = BenchmarkOptions {
                suite: a.suite.or(file.benchmark.suite).unwrap_or(defaults.suite),
                algorithms: a
                    .algorithms
                    .or(file.benchmark.algorithms)
                    .unwrap_or(defaults.algorithms),
                out: a.out,
                seed: a.seed.or(file.benchmark.seed).unwrap_or(defaults.seed),
                ntest: a.ntest.or(file.benchmark.ntest).unwrap_or(defaults.ntest),
                concurrency: a
                    .concurrency
                    .or(file.benchmark.concurrency)
                    .unwrap_or(defaults.concurrency),
                dense_cap: a
                    .dense_cap
                    .or(file.benchmark.dense_cap)
                    .unwrap_or(defaults.dense_cap),
                max_iters: a
                    .max_iters
                    .or(file.benchmark.max_iters)
                    .unwrap_or(defaults.max_iters),
                restarts: a
                    .restarts
                    .or(file.benchmark.restarts)
                    .unwrap_or(defaults.restarts),
                runtime_table: if a.no_runtime_table {
                    false
                } else {
                    file.benchmark.runtime_table.unwrap_or(defaults.runtime_table)
                },
            };
            cmd_benchmark(&opts)
        }
        Command::Validate(a) => cmd_validate(&ValidateOptions { data: a.data }),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
