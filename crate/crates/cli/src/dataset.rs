//! Dataset file format and the CSV import path.
//!
//! The native format is JSON: self-describing, versioned, human-diffable.
//! Grid responses are stored flat in the canonical linearization, which the
//! file states explicitly (`"ordering": "last-factor-fastest"`). The CSV
//! import accepts `x_1, …, x_d, y` rows and reconstructs the factorial
//! structure, refusing anything that is not a complete grid; silently
//! filling holes would break the method's premise.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use gridgp::design::{Factor, FactorialDesign};
use gridgp::gp::TrainingData;

pub const DATASET_FORMAT: &str = "gridgp-dataset";
pub const DATASET_VERSION: u32 = 1;
pub const CANONICAL_ORDERING: &str = "last-factor-fastest";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorSpec {
    pub dim: usize,
    /// `n_k` levels, each of length `dim`.
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub format: String,
    pub version: u32,
    /// Documents the linearization of `values`; must match
    /// [`CANONICAL_ORDERING`] when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<String>,
    pub factors: Vec<FactorSpec>,
    /// Flat responses, last factor fastest.
    pub values: Vec<f64>,
    /// Informational noise level, if known; training estimates its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl DatasetFile {
    pub fn from_design(design: &FactorialDesign, values: Vec<f64>) -> Self {
        DatasetFile {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            ordering: Some(CANONICAL_ORDERING.into()),
            factors: design
                .factors()
                .iter()
                .map(|f| FactorSpec {
                    dim: f.dim(),
                    points: f.points().map(<[f64]>::to_vec).collect(),
                })
                .collect(),
            values,
            noise: None,
            metadata: None,
        }
    }

    /// Schema and invariant checks; returns the design and raw responses.
    pub fn validate(&self) -> Result<(FactorialDesign, Vec<f64>)> {
        if self.format != DATASET_FORMAT {
            return Err(CliError::input(format!(
                "unrecognized format tag {:?}, expected {DATASET_FORMAT:?}",
                self.format
            )));
        }
        if self.version > DATASET_VERSION {
            return Err(CliError::input(format!(
                "dataset version {} is newer than the supported version {DATASET_VERSION}",
                self.version
            )));
        }
        if let Some(ord) = &self.ordering {
            if ord != CANONICAL_ORDERING {
                return Err(CliError::input(format!(
                    "unsupported ordering {ord:?}, expected {CANONICAL_ORDERING:?}"
                )));
            }
        }
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                Factor::new(f.dim, f.points.clone())
                    .map_err(|e| CliError::input(format!("factor {k}: {e}")))
            })
            .collect::<Result<_>>()?;
        let design =
            FactorialDesign::new(factors).map_err(|e| CliError::input(e.to_string()))?;
        if self.values.len() != design.size() {
            return Err(CliError::input(format!(
                "values length {} does not match grid size {} = {:?}",
                self.values.len(),
                design.size(),
                design.sizes()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::input("values must be finite"));
        }
        Ok((design, self.values.clone()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::input(format!("serialization: {e}")))?;
        std::fs::write(path, body + "\n")?;
        Ok(())
    }
}

/// Loads a dataset: `.csv` goes through the grid-reconstruction import,
/// anything else is parsed as the native JSON format.
pub fn load_dataset(path: &Path) -> Result<(FactorialDesign, Vec<f64>)> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        import_csv(path)
    } else {
        let body = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let file: DatasetFile = serde_json::from_str(&body)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        file.validate()
    }
}

pub fn load_training_data(path: &Path) -> Result<TrainingData> {
    let (design, values) = load_dataset(path)?;
    Ok(TrainingData::new(design, values)?)
}

/// Reconstructs a factorial design from `x_1, …, x_d, y` rows.
///
/// Coordinates are grouped into factors by co-variation: two coordinates
/// belong to the same factor exactly when their joint projection has fewer
/// distinct values than the product of their marginal counts. The point set
/// must then be the complete Cartesian product of the factor level sets,
/// with each grid cell observed exactly once.
pub fn import_csv(path: &Path) -> Result<(FactorialDesign, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("row {i}: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(vals) => {
                if vals.len() < 2 {
                    return Err(CliError::input(format!(
                        "row {i}: need at least one coordinate and a response"
                    )));
                }
                rows.push(vals);
            }
            Err(_) if i == 0 => continue, // header row
            Err(e) => return Err(CliError::input(format!("row {i}: {e}"))),
        }
    }
    if rows.is_empty() {
        return Err(CliError::input("no data rows"));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(CliError::input("ragged rows"));
    }
    let d = width - 1;
    let n = rows.len();

    // distinct values per coordinate (bit patterns; identical text parses to
    // identical bits)
    let distinct: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let set: BTreeSet<u64> = rows.iter().map(|r| r[j].to_bits()).collect();
            set.into_iter().map(f64::from_bits).collect()
        })
        .collect();

    // union-find over coordinates
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let pairs: BTreeSet<(u64, u64)> = rows
                .iter()
                .map(|r| (r[i].to_bits(), r[j].to_bits()))
                .collect();
            if pairs.len() < distinct[i].len() * distinct[j].len() {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<Option<usize>> = vec![None; d];
    for c in 0..d {
        let root = find(&mut parent, c);
        match seen[root] {
            Some(g) => groups[g].push(c),
            None => {
                seen[root] = Some(groups.len());
                groups.push(vec![c]);
            }
        }
    }
    groups.sort_by_key(|g| g[0]);
    // all coordinates co-varying means there is no product structure at all
    // (e.g. scattered points, or a grid with holes); a lone multidimensional
    // factor can be authored in the native JSON format instead
    if groups.len() == 1 && d > 1 {
        return Err(CliError::input(format!(
            "point set is not a complete grid: no Cartesian-product structure \
             across the {d} coordinates"
        )));
    }
    // coordinates within a factor must be contiguous for prediction inputs
    // to stay in column order
    for g in &groups {
        if g.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(CliError::input(format!(
                "coordinates {g:?} co-vary but are not contiguous columns; \
                 reorder the CSV so factor coordinates are adjacent"
            )));
        }
    }

    // factor levels: distinct projections, sorted
    let mut factors = Vec::with_capacity(groups.len());
    let mut level_index: Vec<std::collections::BTreeMap<Vec<u64>, usize>> = Vec::new();
    for g in &groups {
        let set: BTreeSet<Vec<u64>> = rows
            .iter()
            .map(|r| g.iter().map(|&c| r[c].to_bits()).collect())
            .collect();
        let levels: Vec<Vec<f64>> = set
            .iter()
            .map(|bits| bits.iter().map(|&b| f64::from_bits(b)).collect())
            .collect();
        let mut sorted = levels;
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let index: std::collections::BTreeMap<Vec<u64>, usize> = sorted
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().map(|v| v.to_bits()).collect(), i))
            .collect();
        level_index.push(index);
        factors.push(
            Factor::new(g.len(), sorted).map_err(|e| CliError::input(e.to_string()))?,
        );
    }
    let design = FactorialDesign::new(factors).map_err(|e| CliError::input(e.to_string()))?;
    if design.size() != n {
        return Err(CliError::input(format!(
            "point set is not a complete grid: {} rows but factor sizes {:?} imply {}",
            n,
            design.sizes(),
            design.size()
        )));
    }

    // place every row into its grid cell, exactly once
    let sizes = design.sizes();
    let mut values = vec![f64::NAN; n];
    let mut filled = vec![false; n];
    for (ri, row) in rows.iter().enumerate() {
        let mut offset = 0usize;
        for (g, (group, index)) in groups.iter().zip(&level_index).enumerate() {
            let key: Vec<u64> = group.iter().map(|&c| row[c].to_bits()).collect();
            let i = *index.get(&key).expect("level built from these rows");
            offset = offset * sizes[g] + i;
        }
        if filled[offset] {
            return Err(CliError::input(format!(
                "row {ri}: duplicate grid point"
            )));
        }
        filled[offset] = true;
        values[offset] = row[d];
    }
    if let Some(hole) = filled.iter().position(|&f| !f) {
        return Err(CliError::input(format!(
            "point set is not a complete grid: cell {hole} missing"
        )));
    }
    Ok((design, values))
}
