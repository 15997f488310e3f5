//! The four subcommands. Each is a thin shell over the library: load files,
//! call into `gridgp`, write files, print a short report.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::dataset::{load_dataset, load_training_data};
use crate::error::{CliError, Result};
use crate::model_file::{load_model, ModelFile};
use gridgp::bench::{
    builtin_suite, function_by_name, run_suite, smoke_suite, Algorithm, SuiteConfig, TestProblem,
};
use gridgp::design::HyperParams;
use gridgp::hyperopt::{compute_bounds_uniform, init_theta, optimize, OptimizerConfig, PriorSpec};

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub data: PathBuf,
    pub out: PathBuf,
    pub prior: bool,
    pub alpha: f64,
    pub beta: f64,
    pub ck: f64,
    pub big_ck: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// Start the search from the degenerate end of the feasible box
    /// (θ just inside every upper bound) instead of the spacing heuristic.
    pub adversarial_init: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            data: PathBuf::new(),
            out: PathBuf::new(),
            prior: true,
            alpha: gridgp::hyperopt::DEFAULT_ALPHA,
            beta: gridgp::hyperopt::DEFAULT_BETA,
            ck: gridgp::hyperopt::DEFAULT_C,
            big_ck: gridgp::hyperopt::DEFAULT_BIG_C,
            restarts: 3,
            max_iters: 100,
            grad_tol: 1e-3,
            seed: 0,
            adversarial_init: false,
        }
    }
}

pub fn cmd_train(opts: &TrainOptions) -> Result<()> {
    let data = load_training_data(&opts.data)?;
    let design = data.design();
    let k = design.num_factors();

    let prior = if opts.prior {
        Some(PriorSpec::new(
            design,
            opts.alpha,
            opts.beta,
            vec![opts.ck; k],
            vec![opts.big_ck; k],
        )?)
    } else {
        None
    };

    let bounds = compute_bounds_uniform(design, opts.ck, opts.big_ck)?;
    let init_override = if opts.adversarial_init {
        // the degenerate regime: inverse length-scales at the top of the
        // feasible box and near-interpolation noise
        let base = init_theta(&data, Some(&bounds));
        let mut theta = base.theta.clone();
        for (kk, per) in bounds.per_factor().iter().enumerate() {
            for (i, iv) in per.iter().enumerate() {
                if let Some(iv) = iv {
                    theta[kk][i] = iv.lo + 0.99 * iv.width();
                }
            }
        }
        Some(HyperParams::new(theta, base.sigma_f, 1e-4 * base.sigma_f))
    } else {
        None
    };

    let config = OptimizerConfig {
        max_iters: opts.max_iters,
        grad_tol: opts.grad_tol,
        restarts: opts.restarts,
        seed: opts.seed,
        init_override,
        ..Default::default()
    };

    let started = Instant::now();
    let (model, report) = optimize(&data, prior.as_ref(), &config)?;
    let wall = started.elapsed().as_secs_f64();

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if prior.is_none() {
        // the unconstrained fit may have wandered below the spacing rule
        for (kk, per) in bounds.per_factor().iter().enumerate() {
            for (i, iv) in per.iter().enumerate() {
                if let Some(iv) = iv {
                    let theta = model.params().theta[kk][i];
                    if theta > iv.hi {
                        eprintln!(
                            "warning: factor {kk} component {i}: fitted length-scale {:.6e} \
                             is below the lower bound {:.6e} ({}x the minimum spacing)",
                            1.0 / theta,
                            1.0 / iv.hi,
                            opts.ck
                        );
                    }
                }
            }
        }
    }

    ModelFile::from_model(&model, prior.as_ref(), &report).save(&opts.out)?;

    println!("log marginal likelihood: {}", model.loglik());
    if prior.is_some() {
        println!("penalized objective:     {}", report.objective);
    }
    println!("length-scales:");
    for (kk, th) in model.params().theta.iter().enumerate() {
        for (i, &t) in th.iter().enumerate() {
            println!("  factor {kk} component {i}: {} (theta {})", 1.0 / t, t);
        }
    }
    println!("sigma_f: {}", model.params().sigma_f);
    println!("sigma_noise: {}", model.params().sigma_noise);
    println!(
        "termination: {} after {} iterations ({} evaluations, restart {})",
        report.termination, report.iterations, report.evaluations, report.restart_index
    );
    println!("wall time: {wall:.3} s");
    println!("model written to {}", opts.out.display());
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PredictOptions {
    pub model: PathBuf,
    pub points: PathBuf,
    pub out: PathBuf,
    pub variance: bool,
}

pub fn cmd_predict(opts: &PredictOptions) -> Result<()> {
    let model = load_model(&opts.model)?;
    let d = model.data().design().total_dim();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&opts.points)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", opts.points.display())))?;

    let out = std::fs::File::create(&opts.out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", opts.out.display())))?;
    let mut w = BufWriter::new(out);
    for j in 1..=d {
        write!(w, "x_{j},")?;
    }
    if opts.variance {
        writeln!(w, "mean,variance")?;
    } else {
        writeln!(w, "mean")?;
    }

    let mut rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("row {i}: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let x = match parsed {
            Ok(x) => x,
            Err(_) if i == 0 => continue, // header row
            Err(e) => return Err(CliError::input(format!("row {i}: {e}"))),
        };
        if x.len() != d {
            return Err(CliError::input(format!(
                "row {i} has {} columns, the model expects {d}",
                x.len()
            )));
        }
        for v in &x {
            write!(w, "{v},")?;
        }
        if opts.variance {
            let p = model.predict(&x)?;
            writeln!(w, "{},{}", p.mean, p.variance)?;
        } else {
            writeln!(w, "{}", model.predict_mean(&x)?)?;
        }
        rows += 1;
    }
    w.flush()?;
    println!("{rows} predictions written to {}", opts.out.display());
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub data: PathBuf,
}

pub fn cmd_validate(opts: &ValidateOptions) -> Result<()> {
    let (design, values) = load_dataset(&opts.data)?;
    let sizes = design.sizes();
    let n_max = *sizes.iter().max().expect("at least one factor");
    let n_min = *sizes.iter().min().expect("at least one factor");
    println!("dataset {} is valid", opts.data.display());
    println!("factors: {}", design.num_factors());
    for (k, f) in design.factors().iter().enumerate() {
        println!("  factor {k}: {} levels in R^{}", f.len(), f.dim());
    }
    println!("grid size N: {}", values.len());
    println!("input dimension d: {}", design.total_dim());
    println!(
        "anisotropy ratio (max n_k / min n_k): {}",
        n_max as f64 / n_min as f64
    );
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub suite: String,
    pub algorithms: String,
    pub out: PathBuf,
    pub seed: u64,
    pub ntest: usize,
    pub concurrency: usize,
    pub dense_cap: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub runtime_table: bool,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            suite: "builtin".into(),
            algorithms: "tensorGP,tensorGP-reg,denseGP".into(),
            out: PathBuf::new(),
            seed: 0,
            ntest: 5000,
            concurrency: 1,
            dense_cap: 256,
            max_iters: 60,
            restarts: 2,
            runtime_table: true,
        }
    }
}

/// Custom suite file: a JSON array of problem descriptions.
#[derive(Debug, serde::Deserialize)]
struct SuiteEntry {
    function: String,
    partition: Vec<usize>,
    sizes: Vec<usize>,
    #[serde(default = "default_noise")]
    noise_level: f64,
}

fn default_noise() -> f64 {
    0.01
}

fn load_suite(name: &str) -> Result<Vec<TestProblem>> {
    match name {
        "builtin" => Ok(builtin_suite()),
        "smoke" => Ok(smoke_suite()),
        path => {
            let body = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::input(format!("cannot read suite {path}: {e}")))?;
            let entries: Vec<SuiteEntry> = serde_json::from_str(&body)
                .map_err(|e| CliError::input(format!("suite {path}: {e}")))?;
            entries
                .into_iter()
                .map(|e| {
                    let f = function_by_name(&e.function).ok_or_else(|| {
                        CliError::input(format!("unknown test function {:?}", e.function))
                    })?;
                    Ok(TestProblem::new(f, e.partition, e.sizes, e.noise_level)?)
                })
                .collect()
        }
    }
}

pub fn cmd_benchmark(opts: &BenchmarkOptions) -> Result<()> {
    let problems = load_suite(&opts.suite)?;
    let algorithms: Vec<Algorithm> = opts
        .algorithms
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            Algorithm::from_name(name)
                .ok_or_else(|| CliError::input(format!("unknown algorithm {name:?}")))
        })
        .collect::<Result<_>>()?;
    if algorithms.is_empty() {
        return Err(CliError::input("no algorithms selected"));
    }

    let config = SuiteConfig {
        seed: opts.seed,
        n_test: opts.ntest,
        dense_cap: opts.dense_cap,
        concurrency: opts.concurrency,
        optimizer: OptimizerConfig {
            max_iters: opts.max_iters,
            restarts: opts.restarts,
            seed: opts.seed,
            ..Default::default()
        },
        with_runtime_table: opts.runtime_table,
        ..Default::default()
    };

    let started = Instant::now();
    let output = run_suite(&problems, &algorithms, &config)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    output.write_csvs(&opts.out)?;
    let ok = output
        .records
        .iter()
        .filter(|r| matches!(r.status, gridgp::bench::RunStatus::Ok))
        .count();
    println!(
        "{} runs ({ok} ok) over {} problems in {:.1} s",
        output.records.len(),
        problems.len(),
        started.elapsed().as_secs_f64()
    );
    println!(
        "records.csv, profile_accuracy.csv, profile_time.csv, runtimes.csv written to {}",
        opts.out.display()
    );
    Ok(())
}
