//! Performance profiles: for each algorithm `a`, the fraction of problems on
//! which its metric is within a factor `τ` of the per-problem best,
//! `ρ_a(τ) = |{p : t_{p,a} / min_s t_{p,s} ≤ τ}| / n_p`.

use std::collections::BTreeMap;

use crate::bench::suite::BenchmarkRecord;
use crate::error::{GpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub tau: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct AlgorithmCurve {
    pub algorithm: String,
    pub points: Vec<ProfilePoint>,
}

impl AlgorithmCurve {
    /// Step-function value at `tau` (right-continuous).
    pub fn rho_at(&self, tau: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.tau <= tau)
            .last()
            .map_or(0.0, |p| p.rho)
    }
}

#[derive(Debug, Clone)]
pub struct PerformanceProfile {
    pub curves: Vec<AlgorithmCurve>,
}

impl PerformanceProfile {
    pub fn curve(&self, algorithm: &str) -> Option<&AlgorithmCurve> {
        self.curves.iter().find(|c| c.algorithm == algorithm)
    }
}

/// Which record field feeds the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMetric {
    Mse,
    TrainTime,
}

impl ProfileMetric {
    fn of(self, r: &BenchmarkRecord) -> f64 {
        match self {
            ProfileMetric::Mse => r.mse,
            ProfileMetric::TrainTime => r.train_time_s,
        }
    }
}

/// Computes the profile over one record per `(problem, algorithm)` pair.
/// Failed runs must already carry `+∞` metrics. Problems where every
/// algorithm failed are dropped with a warning.
pub fn dolan_more(
    records: &[BenchmarkRecord],
    metric: ProfileMetric,
) -> Result<(PerformanceProfile, Vec<String>)> {
    if records.is_empty() {
        return Err(GpError::Validation("no benchmark records".into()));
    }
    let mut algorithms: Vec<String> = records.iter().map(|r| r.algorithm.clone()).collect();
    algorithms.sort();
    algorithms.dedup();

    // problem -> algorithm -> metric
    let mut table: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for r in records {
        let slot = table
            .entry(r.problem.as_str())
            .or_default()
            .insert(r.algorithm.as_str(), metric.of(r));
        if slot.is_some() {
            return Err(GpError::Validation(format!(
                "duplicate record for ({}, {})",
                r.problem, r.algorithm
            )));
        }
    }
    for (p, row) in &table {
        for a in &algorithms {
            if !row.contains_key(a.as_str()) {
                return Err(GpError::Validation(format!(
                    "missing record for ({p}, {a})"
                )));
            }
        }
    }

    let mut warnings = Vec::new();
    // ratios per algorithm over retained problems
    let mut ratios: BTreeMap<&str, Vec<f64>> = algorithms
        .iter()
        .map(|a| (a.as_str(), Vec::new()))
        .collect();
    let mut kept = 0usize;
    for (p, row) in &table {
        let tmin = row.values().fold(f64::INFINITY, |m, &v| m.min(v));
        if !tmin.is_finite() {
            warnings.push(format!("problem {p} dropped: every algorithm failed"));
            continue;
        }
        kept += 1;
        for a in &algorithms {
            let t = row[a.as_str()];
            let r = if t == tmin {
                1.0
            } else if tmin == 0.0 || !t.is_finite() {
                f64::INFINITY
            } else {
                t / tmin
            };
            ratios.get_mut(a.as_str()).unwrap().push(r);
        }
    }
    if kept == 0 {
        return Err(GpError::Validation(
            "every problem was dropped: no successful runs".into(),
        ));
    }

    let mut taus: Vec<f64> = ratios
        .values()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .chain(std::iter::once(1.0))
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();

    let n_p = kept as f64;
    let curves = algorithms
        .iter()
        .map(|a| {
            let rs = &ratios[a.as_str()];
            let points = taus
                .iter()
                .map(|&tau| ProfilePoint {
                    tau,
                    rho: rs.iter().filter(|&&r| r <= tau).count() as f64 / n_p,
                })
                .collect();
            AlgorithmCurve {
                algorithm: a.clone(),
                points,
            }
        })
        .collect();
    Ok((PerformanceProfile { curves }, warnings))
}
