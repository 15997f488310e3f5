//! Suite runner: seeded design generation, training of each algorithm,
//! records, profiles and the runtime-vs-N table.

use std::io::Write;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bench::functions::{function_by_name, TestFunction};
use crate::bench::profile::{dolan_more, PerformanceProfile, ProfileMetric};
use crate::design::{Factor, FactorialDesign};
use crate::error::{GpError, Result};
use crate::gp::TrainingData;
use crate::hyperopt::{optimize, optimize_dense, OptimizerConfig, PriorSpec};

/// One benchmark target: a function, a factor partition of its coordinates,
/// factor sizes and a relative noise level.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: String,
    pub function: TestFunction,
    /// Coordinate counts per factor; sums to the function dimension.
    pub partition: Vec<usize>,
    /// Levels per factor.
    pub sizes: Vec<usize>,
    /// Noise standard deviation as a fraction of the noiseless response
    /// standard deviation over the grid.
    pub noise_level: f64,
}

impl TestProblem {
    pub fn new(
        function: TestFunction,
        partition: Vec<usize>,
        sizes: Vec<usize>,
        noise_level: f64,
    ) -> Result<Self> {
        if partition.iter().sum::<usize>() != function.dim {
            return Err(GpError::Validation(format!(
                "partition {partition:?} does not sum to dimension {}",
                function.dim
            )));
        }
        if partition.len() != sizes.len() {
            return Err(GpError::Validation(
                "partition and sizes must have the same length".into(),
            ));
        }
        if sizes.contains(&0) || partition.contains(&0) {
            return Err(GpError::Validation("factor sizes and dims must be >= 1".into()));
        }
        let name = format!(
            "{}_p{}_n{}",
            function.name,
            partition
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("-"),
            sizes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("x"),
        );
        Ok(TestProblem {
            name,
            function,
            partition,
            sizes,
            noise_level,
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().product()
    }
}

/// A generated instance: training grid plus a held-out uniform test set with
/// noiseless truths.
pub struct GeneratedProblem {
    pub data: TrainingData,
    /// Row-major `n_test × d` query points.
    pub test_x: Vec<f64>,
    pub test_f: Vec<f64>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn problem_rng(problem: &TestProblem, seed: u64) -> ChaCha8Rng {
    let mixed = fnv1a(problem.name.as_bytes()) ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Draws factor levels uniformly in the box (sorted), evaluates the function
/// on the full grid with additive Gaussian noise, and samples the test set.
pub fn generate_design(
    problem: &TestProblem,
    seed: u64,
    n_test: usize,
) -> Result<GeneratedProblem> {
    let mut rng = problem_rng(problem, seed);
    let f = &problem.function;
    let mut factors = Vec::with_capacity(problem.partition.len());
    let mut offset = 0usize;
    for (&dk, &nk) in problem.partition.iter().zip(&problem.sizes) {
        let mut levels: Vec<Vec<f64>> = (0..nk)
            .map(|_| {
                (0..dk)
                    .map(|j| rng.gen_range(f.lo[offset + j]..f.hi[offset + j]))
                    .collect()
            })
            .collect();
        levels.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        factors.push(Factor::new(dk, levels)?);
        offset += dk;
    }
    let design = FactorialDesign::new(factors)?;

    let points = design.materialize(crate::design::MATERIALIZE_CAP)?;
    let d = design.total_dim();
    let n = design.size();
    let truths: Vec<f64> = (0..n).map(|i| (f.eval)(&points[i * d..(i + 1) * d])).collect();
    let mean = truths.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (truths.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let sigma = problem.noise_level * std;
    let values: Vec<f64> = truths
        .iter()
        .map(|&t| {
            let eps: f64 = StandardNormal.sample(&mut rng);
            t + sigma * eps
        })
        .collect();
    let data = TrainingData::new(design, values)?;

    let mut test_x = Vec::with_capacity(n_test * d);
    let mut test_f = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let x: Vec<f64> = (0..d).map(|j| rng.gen_range(f.lo[j]..f.hi[j])).collect();
        test_f.push((f.eval)(&x));
        test_x.extend_from_slice(&x);
    }
    Ok(GeneratedProblem {
        data,
        test_x,
        test_f,
    })
}

/// Mean squared error against noiseless truths.
pub fn mse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(GpError::ShapeMismatch(format!(
            "mse over {} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    Ok(predictions
        .iter()
        .zip(truths)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum::<f64>()
        / predictions.len() as f64)
}

/// The trained algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Kronecker-structured GP, plain maximum likelihood.
    TensorGp,
    /// Kronecker-structured GP with the beta-prior penalty and spacing
    /// bounds.
    TensorGpReg,
    /// Dense O(N³) GP, run only below the size cap.
    DenseGp,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::TensorGp => "tensorGP",
            Algorithm::TensorGpReg => "tensorGP-reg",
            Algorithm::DenseGp => "denseGP",
        }
    }

    pub fn from_name(s: &str) -> Option<Algorithm> {
        match s {
            "tensorGP" => Some(Algorithm::TensorGp),
            "tensorGP-reg" => Some(Algorithm::TensorGpReg),
            "denseGP" => Some(Algorithm::DenseGp),
            _ => None,
        }
    }

    pub fn all() -> [Algorithm; 3] {
        [Algorithm::TensorGp, Algorithm::TensorGpReg, Algorithm::DenseGp]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Failed(String),
    Skipped(String),
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::Failed(msg) => write!(f, "failed: {msg}"),
            RunStatus::Skipped(msg) => write!(f, "skipped: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub mse: f64,
    pub train_time_s: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone, Copy)]
pub struct RuntimeRow {
    pub n: usize,
    pub seconds: f64,
}

/// Suite-level configuration.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_test: usize,
    /// Largest N the dense baseline will attempt.
    pub dense_cap: usize,
    /// Worker threads for independent runs; keep 1 when timings matter.
    pub concurrency: usize,
    pub optimizer: OptimizerConfig,
    /// Grid sizes for the runtime-vs-N table (3 one-dimensional factors).
    pub runtime_sizes: Vec<Vec<usize>>,
    pub with_runtime_table: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            n_test: 5000,
            dense_cap: 256,
            concurrency: 1,
            optimizer: OptimizerConfig {
                max_iters: 60,
                restarts: 2,
                ..Default::default()
            },
            runtime_sizes: vec![
                vec![4, 4, 4],
                vec![8, 5, 4],
                vec![12, 6, 6],
                vec![10, 10, 10],
                vec![20, 10, 10],
                vec![32, 20, 16],
            ],
            with_runtime_table: true,
        }
    }
}

pub struct SuiteOutput {
    pub records: Vec<BenchmarkRecord>,
    pub accuracy_profile: PerformanceProfile,
    pub time_profile: PerformanceProfile,
    pub runtimes: Vec<RuntimeRow>,
    pub warnings: Vec<String>,
}

fn run_one(problem: &TestProblem, algorithm: Algorithm, config: &SuiteConfig) -> BenchmarkRecord {
    let failed = |msg: String| BenchmarkRecord {
        problem: problem.name.clone(),
        algorithm: algorithm.name().into(),
        seed: config.seed,
        mse: f64::INFINITY,
        train_time_s: f64::INFINITY,
        status: RunStatus::Failed(msg),
    };

    if algorithm == Algorithm::DenseGp && problem.n() > config.dense_cap {
        return BenchmarkRecord {
            problem: problem.name.clone(),
            algorithm: algorithm.name().into(),
            seed: config.seed,
            mse: f64::INFINITY,
            train_time_s: f64::INFINITY,
            status: RunStatus::Skipped(format!(
                "N = {} above dense cap {}",
                problem.n(),
                config.dense_cap
            )),
        };
    }

    let gen = match generate_design(problem, config.seed, config.n_test) {
        Ok(g) => g,
        Err(e) => return failed(format!("design generation: {e}")),
    };
    let d = gen.data.design().total_dim();

    let started = Instant::now();
    let predictions: Result<Vec<f64>> = match algorithm {
        Algorithm::TensorGp | Algorithm::TensorGpReg => {
            let prior = if algorithm == Algorithm::TensorGpReg {
                match PriorSpec::with_defaults(gen.data.design()) {
                    Ok(p) => Some(p),
                    Err(e) => return failed(format!("prior construction: {e}")),
                }
            } else {
                None
            };
            match optimize(&gen.data, prior.as_ref(), &config.optimizer) {
                Ok((model, _report)) => {
                    let t = started.elapsed().as_secs_f64();
                    let preds = (0..gen.test_f.len())
                        .map(|i| model.predict_mean(&gen.test_x[i * d..(i + 1) * d]))
                        .collect();
                    return finish(problem, algorithm, config, preds, &gen, t);
                }
                Err(e) => Err(e),
            }
        }
        Algorithm::DenseGp => match optimize_dense(&gen.data, None, &config.optimizer) {
            Ok((model, _params, _report)) => {
                let t = started.elapsed().as_secs_f64();
                let preds = (0..gen.test_f.len())
                    .map(|i| model.predict_mean(&gen.test_x[i * d..(i + 1) * d]))
                    .collect();
                return finish(problem, algorithm, config, preds, &gen, t);
            }
            Err(e) => Err(e),
        },
    };
    failed(format!("training: {}", predictions.err().unwrap()))
}

fn finish(
    problem: &TestProblem,
    algorithm: Algorithm,
    config: &SuiteConfig,
    preds: Result<Vec<f64>>,
    gen: &GeneratedProblem,
    train_time_s: f64,
) -> BenchmarkRecord {
    match preds.and_then(|p| mse(&p, &gen.test_f)) {
        Ok(err) => BenchmarkRecord {
            problem: problem.name.clone(),
            algorithm: algorithm.name().into(),
            seed: config.seed,
            mse: err,
            train_time_s,
            status: RunStatus::Ok,
        },
        Err(e) => BenchmarkRecord {
            problem: problem.name.clone(),
            algorithm: algorithm.name().into(),
            seed: config.seed,
            mse: f64::INFINITY,
            train_time_s: f64::INFINITY,
            status: RunStatus::Failed(format!("prediction: {e}")),
        },
    }
}

/// Trains every algorithm on every problem, then derives accuracy and time
/// profiles and (optionally) the runtime table. Per-run failures are
/// recorded, never fatal.
pub fn run_suite(
    problems: &[TestProblem],
    algorithms: &[Algorithm],
    config: &SuiteConfig,
) -> Result<SuiteOutput> {
    if problems.is_empty() || algorithms.is_empty() {
        return Err(GpError::Validation("empty suite".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..algorithms.len()).map(move |a| (p, a)))
        .collect();

    let mut records: Vec<BenchmarkRecord> = if config.concurrency <= 1 {
        tasks
            .iter()
            .map(|&(p, a)| run_one(&problems[p], algorithms[a], config))
            .collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, BenchmarkRecord)>();
        std::thread::scope(|scope| {
            for _ in 0..config.concurrency.min(tasks.len()) {
                let tx = tx.clone();
                let next = &next;
                let tasks = &tasks;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let (p, a) = tasks[i];
                    let rec = run_one(&problems[p], algorithms[a], config);
                    if tx.send((i, rec)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        let mut slots: Vec<(usize, BenchmarkRecord)> = rx.into_iter().collect();
        slots.sort_by_key(|(i, _)| *i);
        slots.into_iter().map(|(_, r)| r).collect()
    };
    records.sort_by(|a, b| {
        (&a.problem, &a.algorithm, a.seed).cmp(&(&b.problem, &b.algorithm, b.seed))
    });

    let (accuracy_profile, mut warnings) = dolan_more(&records, ProfileMetric::Mse)?;
    let (time_profile, w2) = dolan_more(&records, ProfileMetric::TrainTime)?;
    warnings.extend(w2);

    let runtimes = if config.with_runtime_table {
        runtime_table(config)?
    } else {
        Vec::new()
    };

    Ok(SuiteOutput {
        records,
        accuracy_profile,
        time_profile,
        runtimes,
        warnings,
    })
}

/// Measures full training time of the structured GP on growing 3-factor
/// grids of a fixed smooth function. The iteration budget is pinned so rows
/// are comparable across N.
pub fn runtime_table(config: &SuiteConfig) -> Result<Vec<RuntimeRow>> {
    let f = function_by_name("sine3").expect("sine3 is in the catalog");
    let mut rows = Vec::with_capacity(config.runtime_sizes.len());
    for sizes in &config.runtime_sizes {
        if sizes.len() != 3 {
            return Err(GpError::Validation(
                "runtime table expects 3 one-dimensional factors".into(),
            ));
        }
        let problem = TestProblem::new(f, vec![1, 1, 1], sizes.clone(), 0.01)?;
        let gen = generate_design(&problem, config.seed, 1)?;
        let opt = OptimizerConfig {
            max_iters: 15,
            grad_tol: 0.0,
            restarts: 1,
            seed: config.seed,
            ..Default::default()
        };
        let started = Instant::now();
        let _ = optimize(&gen.data, None, &opt)?;
        rows.push(RuntimeRow {
            n: problem.n(),
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// The shipped ~40-combination suite: each catalog function under several
/// factor partitions and (often anisotropic) size vectors.
pub fn builtin_suite() -> Vec<TestProblem> {
    let f = |name: &str| function_by_name(name).expect("catalog function");
    let mk = |func: TestFunction, partition: Vec<usize>, sizes: Vec<usize>| {
        TestProblem::new(func, partition, sizes, 0.01).expect("valid builtin problem")
    };
    vec![
        mk(f("branin"), vec![1, 1], vec![15, 4]),
        mk(f("branin"), vec![1, 1], vec![8, 8]),
        mk(f("branin"), vec![1, 1], vec![30, 6]),
        mk(f("branin"), vec![1, 1], vec![12, 25]),
        mk(f("branin"), vec![1, 1], vec![40, 12]),
        mk(f("branin"), vec![1, 1], vec![64, 16]),
        mk(f("hartmann3"), vec![1, 1, 1], vec![8, 8, 8]),
        mk(f("hartmann3"), vec![1, 1, 1], vec![15, 5, 4]),
        mk(f("hartmann3"), vec![1, 1, 1], vec![6, 10, 12]),
        mk(f("hartmann3"), vec![1, 1, 1], vec![20, 20, 20]),
        mk(f("hartmann3"), vec![1, 2], vec![12, 30]),
        mk(f("hartmann3"), vec![1, 2], vec![5, 40]),
        mk(f("hartmann6"), vec![1, 1, 1, 1, 1, 1], vec![5, 4, 4, 3, 3, 3]),
        mk(f("hartmann6"), vec![2, 2, 2], vec![12, 10, 8]),
        mk(f("hartmann6"), vec![2, 2, 2], vec![20, 15, 10]),
        mk(f("hartmann6"), vec![1, 2, 3], vec![6, 15, 25]),
        mk(f("hartmann6"), vec![3, 3], vec![25, 18]),
        mk(f("hartmann6"), vec![1, 1, 2, 2], vec![4, 4, 12, 10]),
        mk(f("rosenbrock2"), vec![1, 1], vec![10, 10]),
        mk(f("rosenbrock2"), vec![1, 1], vec![25, 5]),
        mk(f("rosenbrock2"), vec![1, 1], vec![50, 8]),
        mk(f("rosenbrock2"), vec![1, 1], vec![40, 40]),
        mk(f("rosenbrock4"), vec![1, 1, 1, 1], vec![6, 6, 6, 6]),
        mk(f("rosenbrock4"), vec![1, 1, 1, 1], vec![10, 8, 5, 4]),
        mk(f("rosenbrock4"), vec![2, 2], vec![30, 20]),
        mk(f("rosenbrock4"), vec![2, 2], vec![60, 25]),
        mk(f("rastrigin2"), vec![1, 1], vec![20, 20]),
        mk(f("rastrigin2"), vec![1, 1], vec![35, 12]),
        mk(f("rastrigin3"), vec![1, 1, 1], vec![12, 12, 12]),
        mk(f("sine2"), vec![1, 1], vec![12, 12]),
        mk(f("sine2"), vec![1, 1], vec![25, 6]),
        mk(f("sine2"), vec![1, 1], vec![8, 40]),
        mk(f("sine2"), vec![1, 1], vec![50, 50]),
        mk(f("sine3"), vec![1, 1, 1], vec![10, 10, 10]),
        mk(f("sine3"), vec![1, 2], vec![15, 30]),
        mk(f("aniso2"), vec![1, 1], vec![15, 4]),
        mk(f("aniso2"), vec![1, 1], vec![30, 8]),
        mk(f("aniso2"), vec![1, 1], vec![15, 10]),
        mk(f("aniso2"), vec![1, 1], vec![60, 6]),
    ]
}

/// Three small problems for quick end-to-end checks.
pub fn smoke_suite() -> Vec<TestProblem> {
    let f = |name: &str| function_by_name(name).expect("catalog function");
    vec![
        TestProblem::new(f("aniso2"), vec![1, 1], vec![15, 4], 0.01).unwrap(),
        TestProblem::new(f("branin"), vec![1, 1], vec![8, 6], 0.01).unwrap(),
        TestProblem::new(f("hartmann3"), vec![1, 2], vec![5, 12], 0.01).unwrap(),
    ]
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| GpError::Validation(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(body.as_bytes())
        .map_err(|e| GpError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

impl SuiteOutput {
    /// Writes `records.csv`, `profile_accuracy.csv`, `profile_time.csv` and
    /// `runtimes.csv` into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| GpError::Validation(format!("cannot create {}: {e}", dir.display())))?;

        let mut records = String::from("problem,algorithm,seed,mse,train_time_s,status\n");
        for r in &self.records {
            let status = r.status.to_string().replace('"', "\"\"");
            records.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                r.problem, r.algorithm, r.seed, r.mse, r.train_time_s, status
            ));
        }
        write_file(&dir.join("records.csv"), &records)?;

        for (file, profile) in [
            ("profile_accuracy.csv", &self.accuracy_profile),
            ("profile_time.csv", &self.time_profile),
        ] {
            let mut body = String::from("algorithm,tau,rho,log2_tau\n");
            for curve in &profile.curves {
                for p in &curve.points {
                    body.push_str(&format!(
                        "{},{},{},{}\n",
                        curve.algorithm,
                        p.tau,
                        p.rho,
                        p.tau.log2()
                    ));
                }
            }
            write_file(&dir.join(file), &body)?;
        }

        let mut runtimes = String::from("N,seconds\n");
        for row in &self.runtimes {
            runtimes.push_str(&format!("{},{}\n", row.n, row.seconds));
        }
        write_file(&dir.join("runtimes.csv"), &runtimes)?;
        Ok(())
    }
}
