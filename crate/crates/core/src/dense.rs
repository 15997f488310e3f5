//! Dense GP over the materialized grid: the O(N³) reference path.
//!
//! Everything here works on the full `N × N` covariance matrix via a
//! Cholesky factorization and shares no code with the structured solve, so
//! the two routes check each other. The dense path also serves as
//! the exactness baseline (`denseGP`) in the benchmark harness for sizes
//! where it is feasible.

use crate::design::{FactorialDesign, HyperParams};
use crate::error::{GpError, Result};
use crate::gp::{HyperGradient, TrainingData};
use crate::tensor::Matrix;

/// Largest design the dense path will materialize.
pub const DENSE_CAP: usize = 4096;

/// Concatenated θ vector over all factors, matching the coordinate order of
/// materialized grid points.
fn concat_theta(params: &HyperParams) -> Vec<f64> {
    params.theta.iter().flatten().copied().collect()
}

fn se_full(theta: &[f64], sigma_f: f64, u: &[f64], v: &[f64]) -> f64 {
    let ex: f64 = theta
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&t, (&a, &b))| {
            let d = a - b;
            t * t * d * d
        })
        .sum();
    sigma_f * sigma_f * (-ex).exp()
}

/// The full `N × N` kernel matrix `K_f` over the materialized design,
/// evaluated coordinate-wise (no Kronecker structure used).
pub fn dense_covariance(design: &FactorialDesign, params: &HyperParams) -> Result<Matrix> {
    params.validate(design)?;
    let pts = design.materialize(DENSE_CAP)?;
    let d = design.total_dim();
    let n = design.size();
    let theta = concat_theta(params);
    let mut k = Matrix::zeros(n, n);
    for p in 0..n {
        let xp = &pts[p * d..(p + 1) * d];
        k.set(p, p, params.sigma_f * params.sigma_f);
        for q in (p + 1)..n {
            let xq = &pts[q * d..(q + 1) * d];
            let v = se_full(&theta, params.sigma_f, xp, xq);
            k.set(p, q, v);
            k.set(q, p, v);
        }
    }
    Ok(k)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(m: &Matrix) -> Result<Self> {
        let n = m.rows();
        if n != m.cols() {
            return Err(GpError::ShapeMismatch("Cholesky of non-square matrix".into()));
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(GpError::CholeskyFailed { pivot: i, value: s });
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(Cholesky { l })
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        debug_assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l.get(i, k) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l.get(k, i) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }

    pub fn log_det(&self) -> f64 {
        (0..self.l.rows())
            .map(|i| self.l.get(i, i).ln())
            .sum::<f64>()
            * 2.0
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Explicit inverse, column by column. O(N³); used only for the dense
    /// gradient's trace terms.
    pub fn inverse(&self) -> Matrix {
        let n = self.l.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}

fn dense_ky(data: &TrainingData, params: &HyperParams) -> Result<Matrix> {
    let mut k = dense_covariance(data.design(), params)?;
    let shift = params.sigma_noise * params.sigma_noise + params.jitter();
    let n = k.rows();
    for i in 0..n {
        let v = k.get(i, i) + shift;
        k.set(i, i, v);
    }
    Ok(k)
}

/// Dense log marginal likelihood (direct algebra on `K_y`).
pub fn dense_loglik(data: &TrainingData, params: &HyperParams) -> Result<f64> {
    let ky = dense_ky(data, params)?;
    let chol = Cholesky::factor(&ky)?;
    let y = data.y().as_slice();
    let a = chol.solve(y);
    let quad: f64 = y.iter().zip(&a).map(|(&u, &v)| u * v).sum();
    let n = y.len() as f64;
    Ok(-0.5 * quad - 0.5 * chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

/// Dense log marginal likelihood and gradient via
/// `∂L/∂θ = −½·Tr(K_y⁻¹K') + ½·αᵀK'α` with fully materialized `K'`.
pub fn dense_loglik_with_grad(
    data: &TrainingData,
    params: &HyperParams,
) -> Result<(f64, HyperGradient)> {
    let design = data.design();
    let kf = dense_covariance(design, params)?;
    let jitter = params.jitter();
    let shift = params.sigma_noise * params.sigma_noise + jitter;
    let n = design.size();
    let mut ky = kf.clone();
    for i in 0..n {
        let v = ky.get(i, i) + shift;
        ky.set(i, i, v);
    }
    let chol = Cholesky::factor(&ky)?;
    let y = data.y().as_slice();
    let a = chol.solve(y);
    let quad_y: f64 = y.iter().zip(&a).map(|(&u, &v)| u * v).sum();
    let loglik =
        -0.5 * quad_y - 0.5 * chol.log_det() - 0.5 * (n as f64) * (2.0 * std::f64::consts::PI).ln();

    let kinv = chol.inverse();
    let pts = design.materialize(DENSE_CAP)?;
    let d = design.total_dim();
    let theta = concat_theta(params);

    let mut grad = HyperGradient::zeros_like(params);
    let mut offset = 0usize;
    for (i, factor) in design.factors().iter().enumerate() {
        for j in 0..factor.dim() {
            let g = offset + j;
            let t = theta[g];
            // K'[p,q] = K_f[p,q] · (−2 θ_g Δ_g²)
            let mut trace = 0.0;
            let mut quad = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let delta = pts[p * d + g] - pts[q * d + g];
                    let kp = kf.get(p, q) * (-2.0 * t * delta * delta);
                    trace += kinv.get(p, q) * kp;
                    quad += a[p] * kp * a[q];
                }
            }
            grad.theta[i][j] = -0.5 * trace + 0.5 * quad;
        }
        offset += factor.dim();
    }

    // σ_f: K' = (2/σ_f)·K_f (+ jitter derivative when the floor is active)
    {
        let mut trace = 0.0;
        let mut quad = 0.0;
        for p in 0..n {
            for q in 0..n {
                let kp = kf.get(p, q);
                trace += kinv.get(p, q) * kp;
                quad += a[p] * kp * a[q];
            }
        }
        let mut g = (2.0 / params.sigma_f) * (-0.5 * trace + 0.5 * quad);
        if jitter > 0.0 {
            let c = 2.0 * 1e-10 * params.sigma_f;
            let tr_inv: f64 = (0..n).map(|p| kinv.get(p, p)).sum();
            let a_sq: f64 = a.iter().map(|&v| v * v).sum();
            g += c * 0.5 * (a_sq - tr_inv);
        }
        grad.sigma_f = g;
    }

    // σ_noise: K' = 2σ_noise·I
    {
        let tr_inv: f64 = (0..n).map(|p| kinv.get(p, p)).sum();
        let a_sq: f64 = a.iter().map(|&v| v * v).sum();
        grad.sigma_noise = params.sigma_noise * (a_sq - tr_inv);
    }

    Ok((loglik, grad))
}

/// A dense-path trained model; predictions go through `K_y⁻¹` directly.
pub struct DenseGpModel {
    points: Vec<f64>,
    dim: usize,
    theta: Vec<f64>,
    sigma_f: f64,
    y_mean: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    loglik: f64,
}

impl DenseGpModel {
    pub fn fit(data: &TrainingData, params: &HyperParams) -> Result<Self> {
        let ky = dense_ky(data, params)?;
        let chol = Cholesky::factor(&ky)?;
        let y = data.y().as_slice();
        let alpha = chol.solve(y);
        let quad: f64 = y.iter().zip(&alpha).map(|(&u, &v)| u * v).sum();
        let n = y.len() as f64;
        let loglik =
            -0.5 * quad - 0.5 * chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
        Ok(DenseGpModel {
            points: data.design().materialize(DENSE_CAP)?,
            dim: data.design().total_dim(),
            theta: concat_theta(params),
            sigma_f: params.sigma_f,
            y_mean: data.y_mean(),
            chol,
            alpha,
            loglik,
        })
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    fn cross(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(GpError::ShapeMismatch(format!(
                "query has dimension {}, model has {}",
                x.len(),
                self.dim
            )));
        }
        let n = self.points.len() / self.dim;
        Ok((0..n)
            .map(|p| {
                se_full(
                    &self.theta,
                    self.sigma_f,
                    x,
                    &self.points[p * self.dim..(p + 1) * self.dim],
                )
            })
            .collect())
    }

    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        let ks = self.cross(x)?;
        Ok(ks.iter().zip(&self.alpha).map(|(&k, &a)| k * a).sum::<f64>() + self.y_mean)
    }

    pub fn predict_variance(&self, x: &[f64]) -> Result<f64> {
        let ks = self.cross(x)?;
        let sol = self.chol.solve(&ks);
        let explained: f64 = ks.iter().zip(&sol).map(|(&k, &s)| k * s).sum();
        let var = self.sigma_f * self.sigma_f - explained;
        Ok(var.max(0.0))
    }
}
