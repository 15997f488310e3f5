//! Factors, factorial designs and the hyperparameters of the product kernel.

use crate::error::{GpError, Result};
use crate::tensor::Shape;

/// Default cap for materializing a full design as an explicit point list.
pub const MATERIALIZE_CAP: usize = 1_000_000;

/// A factor: `n_k` levels in `R^{d_k}`.
///
/// Levels are stored row-major (`n_k × d_k`). Two identical levels are
/// rejected because they make the factor covariance rank-deficient in a way
/// the noise term cannot fix predictably.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    dim: usize,
    points: Vec<f64>,
}

impl Factor {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(GpError::Validation("factor dimension must be >= 1".into()));
        }
        if points.is_empty() {
            return Err(GpError::Validation("factor needs at least one level".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GpError::Validation(format!(
                    "level {i} has dimension {}, factor has dimension {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GpError::Validation(format!("level {i} has non-finite coordinate")));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(GpError::Validation(format!(
                        "duplicate levels {i} and {j} within a factor"
                    )));
                }
            }
        }
        Ok(Factor {
            dim,
            points: points.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of levels `n_k`.
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // constructor guarantees at least one level
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Range `(min, max)` of coordinate `j` over the levels.
    pub fn coord_range(&self, j: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.points() {
            lo = lo.min(p[j]);
            hi = hi.max(p[j]);
        }
        (lo, hi)
    }

    /// Smallest nonzero pairwise distance `|x_p^{(j)} - x_q^{(j)}|` for
    /// coordinate `j`, or `None` when the coordinate is constant.
    pub fn min_distinct_gap(&self, j: usize) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for p in 0..n {
            for q in (p + 1)..n {
                let d = (self.point(p)[j] - self.point(q)[j]).abs();
                if d > 0.0 {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }
}

/// Cartesian product of factors; training inputs form the complete grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialDesign {
    factors: Vec<Factor>,
}

impl FactorialDesign {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(GpError::Validation("design needs at least one factor".into()));
        }
        Ok(FactorialDesign { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Factor sizes `(n_1, …, n_K)`.
    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::len).collect()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.sizes()).expect("factor sizes are >= 1")
    }

    /// Total input dimension `d = Σ d_k`.
    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    /// Design size `N = ∏ n_k`.
    pub fn size(&self) -> usize {
        self.factors.iter().map(Factor::len).product()
    }

    /// Splits a `d`-dimensional point into its per-factor parts.
    pub fn split_point<'a>(&self, x: &'a [f64]) -> Result<Vec<&'a [f64]>> {
        if x.len() != self.total_dim() {
            return Err(GpError::ShapeMismatch(format!(
                "point has dimension {}, design has {}",
                x.len(),
                self.total_dim()
            )));
        }
        let mut parts = Vec::with_capacity(self.factors.len());
        let mut off = 0;
        for f in &self.factors {
            parts.push(&x[off..off + f.dim()]);
            off += f.dim();
        }
        Ok(parts)
    }

    /// Grid point at a multi-index: the concatenation of per-factor levels.
    pub fn point_at(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for (f, &i) in self.factors.iter().zip(idx) {
            out.extend_from_slice(f.point(i));
        }
        out
    }

    /// Materializes all `N` grid points in canonical order (last factor
    /// fastest) as a flat `N × d` row-major buffer.
    pub fn materialize(&self, cap: usize) -> Result<Vec<f64>> {
        let n = self.size();
        if n > cap {
            return Err(GpError::CapExceeded(format!(
                "design has {n} points, materialization cap is {cap}"
            )));
        }
        let d = self.total_dim();
        let sizes = self.sizes();
        let mut out = Vec::with_capacity(n * d);
        let mut idx = vec![0usize; sizes.len()];
        for _ in 0..n {
            for (f, &i) in self.factors.iter().zip(&idx) {
                out.extend_from_slice(f.point(i));
            }
            // odometer, last factor fastest
            let mut axis = sizes.len();
            while axis > 0 {
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < sizes[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(out)
    }
}

/// Kernel hyperparameters: per-factor inverse length-scales, a single global
/// amplitude and the observation noise.
///
/// Only the product `∏ σ_{f,k}²` is identifiable in a product kernel, so the
/// amplitude is carried globally and absorbed into factor 1 when building
/// per-factor covariance matrices; factors `k > 1` have unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// `theta[k][i]` is the inverse length-scale of coordinate `i` of factor `k`.
    pub theta: Vec<Vec<f64>>,
    pub sigma_f: f64,
    pub sigma_noise: f64,
}

impl HyperParams {
    pub fn new(theta: Vec<Vec<f64>>, sigma_f: f64, sigma_noise: f64) -> Self {
        HyperParams {
            theta,
            sigma_f,
            sigma_noise,
        }
    }

    /// Checks positivity and per-factor dimensions against a design.
    pub fn validate(&self, design: &FactorialDesign) -> Result<()> {
        if self.theta.len() != design.num_factors() {
            return Err(GpError::InvalidParameter(format!(
                "theta has {} factors, design has {}",
                self.theta.len(),
                design.num_factors()
            )));
        }
        for (k, (th, f)) in self.theta.iter().zip(design.factors()).enumerate() {
            if th.len() != f.dim() {
                return Err(GpError::InvalidParameter(format!(
                    "theta[{k}] has {} components, factor has dimension {}",
                    th.len(),
                    f.dim()
                )));
            }
            if th.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
                return Err(GpError::InvalidParameter(format!(
                    "theta[{k}] must be strictly positive and finite, got {th:?}"
                )));
            }
        }
        if self.sigma_f <= 0.0 || !self.sigma_f.is_finite() {
            return Err(GpError::InvalidParameter(format!(
                "sigma_f must be > 0, got {}",
                self.sigma_f
            )));
        }
        if self.sigma_noise < 0.0 || !self.sigma_noise.is_finite() {
            return Err(GpError::InvalidParameter(format!(
                "sigma_noise must be >= 0, got {}",
                self.sigma_noise
            )));
        }
        Ok(())
    }

    /// Amplitude assigned to factor `k`: the global `sigma_f` on factor 0,
    /// unit amplitude elsewhere.
    pub fn factor_sigma(&self, k: usize) -> f64 {
        if k == 0 {
            self.sigma_f
        } else {
            1.0
        }
    }

    /// Jitter added to the eigenvalue tensor when the noise variance is too
    /// small to keep the solve well conditioned. The model's `sigma_noise`
    /// itself is left untouched.
    pub fn jitter(&self) -> f64 {
        let floor = 1e-10 * self.sigma_f * self.sigma_f;
        if self.sigma_noise * self.sigma_noise < floor {
            floor
        } else {
            0.0
        }
    }

    /// Flat concatenation `[θ_1, …, θ_K, σ_f, σ_noise]`; the layout used by
    /// gradient vectors.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.theta.iter().flatten().copied().collect();
        out.push(self.sigma_f);
        out.push(self.sigma_noise);
        out
    }

    /// Length-scales `ℓ = 1/θ`, factor by factor.
    pub fn length_scales(&self) -> Vec<Vec<f64>> {
        self.theta
            .iter()
            .map(|th| th.iter().map(|&t| 1.0 / t).collect())
            .collect()
    }
}
