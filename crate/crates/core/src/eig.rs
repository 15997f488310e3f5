//! Symmetric eigendecomposition of per-factor covariance matrices and the
//! eigenvalue tensor of the grid covariance.
//!
//! The grid covariance `K_y = (⊗_k K_k) + σ_noise² I` shares eigenvectors
//! with `⊗_k U_k`; its eigenvalues are all products of per-factor eigenvalues
//! plus the noise variance. Storing them as a tensor turns inversion and the
//! determinant into entrywise work.

use crate::error::{GpError, Result};
use crate::tensor::{Matrix, Shape, Tensor};

const MAX_SWEEPS: usize = 50;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvectors (columns of `u`) and eigenvalues (descending) of a symmetric
/// matrix, with `K = U·diag(d)·Uᵀ`.
///
/// The sign of each eigenvector is fixed so its first nonzero component is
/// nonnegative, which makes serialized models reproducible.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub u: Matrix,
    pub d: Vec<f64>,
}

impl EigenPair {
    pub fn n(&self) -> usize {
        self.d.len()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Deterministic for identical input bits: fixed sweep order, no pivot
/// randomness. Fails on asymmetric input or if the off-diagonal mass does
/// not vanish within the sweep cap (pathological input).
pub fn sym_eig(k: &Matrix) -> Result<EigenPair> {
    if k.rows() != k.cols() {
        return Err(GpError::ShapeMismatch(format!(
            "eigendecomposition of non-square {}x{} matrix",
            k.rows(),
            k.cols()
        )));
    }
    let asym = k.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(GpError::NotSymmetric(asym));
    }
    let n = k.rows();
    let mut a = k.data().to_vec();
    let mut v = vec![0.0; n * n];
    for p in 0..n {
        v[p * n + p] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|p| a[p * n + p]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].abs();
            }
        }
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 3 {
            0.2 * off / ((n * n) as f64)
        } else {
            0.0
        };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let g = 100.0 * a[p * n + q].abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                    continue;
                }
                if a[p * n + q].abs() <= thresh {
                    continue;
                }
                let mut h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    a[p * n + q] / h
                } else {
                    let theta = 0.5 * h / a[p * n + q];
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                h = t * a[p * n + q];
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[p * n + q] = 0.0;
                let rotate = |a: &mut [f64], i: usize, j: usize| {
                    let g = a[i];
                    let h = a[j];
                    a[i] = g - s * (h + g * tau);
                    a[j] = h + s * (g - h * tau);
                };
                for j in 0..p {
                    rotate(&mut a, j * n + p, j * n + q);
                }
                for j in (p + 1)..q {
                    rotate(&mut a, p * n + j, j * n + q);
                }
                for j in (q + 1)..n {
                    rotate(&mut a, p * n + j, q * n + j);
                }
                for j in 0..n {
                    rotate(&mut v, j * n + p, j * n + q);
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    if !converged {
        // one last check: thresholded sweeps may have zeroed everything on
        // the final pass
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].abs())
            .sum();
        if off != 0.0 {
            return Err(GpError::EigenNoConvergence(MAX_SWEEPS));
        }
    }

    // sort descending, stable in the original index for determinism
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = Matrix::zeros(n, n);
    let mut dsorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        dsorted.push(d[src]);
        // fix sign by the first nonzero component
        let mut flip = false;
        for r in 0..n {
            let val = v[r * n + src];
            if val != 0.0 {
                flip = val < 0.0;
                break;
            }
        }
        for r in 0..n {
            let val = v[r * n + src];
            u.set(r, dst, if flip { -val } else { val });
        }
    }
    Ok(EigenPair { u, d: dsorted })
}

/// Eigenvalues of `K_y` laid out as a tensor: entry `(i_1, …, i_K)` is
/// `shift + ∏_k d_k[i_k]`, where `shift` is the noise variance plus any
/// jitter.
#[derive(Debug, Clone)]
pub struct EigenvalueTensor {
    t: Tensor,
    shift: f64,
}

impl EigenvalueTensor {
    pub fn as_tensor(&self) -> &Tensor {
        &self.t
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn shape(&self) -> &Shape {
        self.t.shape()
    }

    /// `Σ log D`, the log determinant of `K_y`. Computed in the log domain
    /// because the plain product over `N` eigenvalues over/underflows long
    /// before the sizes this crate targets.
    pub fn log_det(&self) -> Result<f64> {
        let dims = self.t.shape().dims().to_vec();
        let mut acc = 0.0;
        for (flat, &v) in self.t.as_slice().iter().enumerate() {
            if v <= 0.0 {
                return Err(GpError::NonPositiveEigenEntry {
                    value: v,
                    index: unflatten(flat, &dims),
                });
            }
            acc += v.ln();
        }
        Ok(acc)
    }

    /// Entrywise reciprocal `1/D`.
    pub fn inverse(&self) -> Result<Tensor> {
        let dims = self.t.shape().dims().to_vec();
        for (flat, &v) in self.t.as_slice().iter().enumerate() {
            if v <= 0.0 {
                return Err(GpError::NonPositiveEigenEntry {
                    value: v,
                    index: unflatten(flat, &dims),
                });
            }
        }
        Ok(self.t.map(|v| 1.0 / v))
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    idx
}

/// Builds the eigenvalue tensor `σ_noise² + ⊗_k diag(d_k)` from per-factor
/// eigenvalue lists.
pub fn build_eigen_tensor(ds: &[Vec<f64>], sigma_noise: f64) -> Result<EigenvalueTensor> {
    build_eigen_tensor_shifted(ds, sigma_noise * sigma_noise)
}

/// Same as [`build_eigen_tensor`] but with an explicit diagonal shift
/// (noise variance plus jitter).
pub fn build_eigen_tensor_shifted(ds: &[Vec<f64>], shift: f64) -> Result<EigenvalueTensor> {
    if shift < 0.0 || shift.is_nan() {
        return Err(GpError::InvalidParameter(format!(
            "diagonal shift must be >= 0, got {shift}"
        )));
    }
    let mut clamped: Vec<Vec<f64>> = Vec::with_capacity(ds.len());
    for d in ds {
        let top = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let tol = 1e-10 * top.max(1.0);
        let mut c = Vec::with_capacity(d.len());
        for &v in d {
            if v < -tol {
                return Err(GpError::InvalidParameter(format!(
                    "eigenvalue {v:.6e} is negative beyond tolerance {tol:.1e}"
                )));
            }
            c.push(v.max(0.0));
        }
        clamped.push(c);
    }
    let shape = Shape::new(clamped.iter().map(Vec::len).collect())?;
    let t = Tensor::from_fn(shape, |idx| {
        let prod: f64 = clamped.iter().zip(idx).map(|(d, &i)| d[i]).product();
        shift + prod
    });
    Ok(EigenvalueTensor { t, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const E_INV: f64 = 0.36787944117144233;

    fn reconstruct(e: &EigenPair) -> Matrix {
        let n = e.n();
        let mut ud = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                ud.set(i, j, e.u.get(i, j) * e.d[j]);
            }
        }
        ud.matmul(&e.u.transpose()).unwrap()
    }

    #[test]
    fn identity_eigendecomposition() {
        let e = sym_eig(&Matrix::identity(3)).unwrap();
        for &d in &e.d {
            assert_relative_eq!(d, 1.0);
        }
        let utu = e.u.transpose().matmul(&e.u).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((utu.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_matrix_sorted_descending() {
        let m = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert_eq!(e.d, vec![2.0, 1.0]);
        // permutation/identity up to sign; sign convention makes it exact
        assert_relative_eq!(e.u.get(0, 0), 1.0);
        assert_relative_eq!(e.u.get(1, 1), 1.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = Matrix::from_rows(&[vec![1.0, E_INV], vec![E_INV, 1.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert_relative_eq!(e.d[0], 1.0 + E_INV, max_relative = 1e-12);
        assert_relative_eq!(e.d[1], 1.0 - E_INV, max_relative = 1e-12);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.25, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(GpError::NotSymmetric(_))));
    }

    #[test]
    fn reconstruction_on_larger_covariance() {
        let n = 150;
        let pts: Vec<f64> = (0..n)
            .map(|i| ((i * 40503usize) % 65536) as f64 / 65536.0 * 4.0)
            .collect();
        let mut m = Matrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let d: f64 = pts[p] - pts[q];
                m.set(p, q, 0.9 * (-2.0 * d * d).exp());
            }
        }
        let e = sym_eig(&m).unwrap();
        let back = reconstruct(&e);
        let scale = m.max_abs();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((back.get(i, j) - m.get(i, j)).abs());
            }
        }
        assert!(worst <= 1e-8 * scale, "worst reconstruction error {worst}");
        let utu = e.u.transpose().matmul(&e.u).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((utu.get(i, j) - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn reconstruction_on_random_covariance() {
        // deterministic pseudo-random SE covariance
        let n = 40;
        let pts: Vec<f64> = (0..n)
            .map(|i| ((i * 2654435761usize) % 10_000) as f64 / 10_000.0 * 3.0)
            .collect();
        let mut m = Matrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let d: f64 = pts[p] - pts[q];
                m.set(p, q, 1.7 * (-1.3 * d * d).exp());
            }
        }
        let e = sym_eig(&m).unwrap();
        let back = reconstruct(&e);
        let scale = m.max_abs();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (back.get(i, j) - m.get(i, j)).abs() <= 1e-8 * scale,
                    "reconstruction off at ({i},{j})"
                );
            }
        }
        // eigenvalues descending
        for w in e.d.windows(2) {
            assert!(w[0] >= w[1]);
        }
        // determinism
        let e2 = sym_eig(&m).unwrap();
        assert_eq!(e.d, e2.d);
        assert_eq!(e.u.data(), e2.u.data());
    }

    #[test]
    fn eigen_tensor_single_factor() {
        let d = build_eigen_tensor(&[vec![2.0, 1.0]], 0.5f64.sqrt()).unwrap();
        let got = d.as_tensor().as_slice();
        assert_relative_eq!(got[0], 2.5, max_relative = 1e-12);
        assert_relative_eq!(got[1], 1.5, max_relative = 1e-12);
    }

    #[test]
    fn eigen_tensor_outer_product() {
        let d = build_eigen_tensor(&[vec![2.0, 1.0], vec![3.0, 1.0]], 0.0).unwrap();
        assert_eq!(d.as_tensor().as_slice(), &[6.0, 2.0, 3.0, 1.0]);
    }

    #[test]
    fn eigen_tensor_all_zero_eigenvalues() {
        let d = build_eigen_tensor(&[vec![0.0, 0.0], vec![0.0]], 1.0).unwrap();
        assert_eq!(d.as_tensor().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn log_det_values() {
        let ones = build_eigen_tensor(&[vec![0.0, 0.0, 0.0]], 1.0).unwrap();
        assert_relative_eq!(ones.log_det().unwrap(), 0.0);
        let d = build_eigen_tensor(&[vec![2.0, 1.0]], 0.5f64.sqrt()).unwrap();
        assert_relative_eq!(d.log_det().unwrap(), 3.75f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(d.log_det().unwrap(), 1.3217558399823195, max_relative = 1e-12);
    }

    #[test]
    fn log_det_rejects_nonpositive_entries_with_index() {
        let d = build_eigen_tensor(&[vec![0.0, 2.0], vec![1.0, 0.0]], 0.0).unwrap();
        match d.log_det() {
            Err(GpError::NonPositiveEigenEntry { index, .. }) => {
                assert_eq!(index.len(), 2);
            }
            other => panic!("expected NonPositiveEigenEntry, got {other:?}"),
        }
    }
}
