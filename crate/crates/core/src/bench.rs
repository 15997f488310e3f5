//! Benchmark harness: test-function catalog, seeded factorial design
//! generation, MSE evaluation, timing and performance profiles.

mod functions;
mod profile;
mod suite;

pub use functions::{catalog, function_by_name, TestFunction};
pub use profile::{dolan_more, AlgorithmCurve, PerformanceProfile, ProfileMetric, ProfilePoint};
pub use suite::{
    builtin_suite, generate_design, mse, run_suite, smoke_suite, Algorithm, BenchmarkRecord,
    GeneratedProblem, RunStatus, RuntimeRow, SuiteConfig, SuiteOutput, TestProblem,
};
