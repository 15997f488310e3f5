//! Dense K-dimensional tensors, mode products and small dense matrices.
//!
//! The canonical linearization puts the *last* axis fastest: element
//! `(i_1, …, i_K)` of a tensor with dims `(n_1, …, n_K)` sits at flat offset
//! `(((i_1·n_2)+i_2)·n_3+…)+i_K`. This matches the row indexing of the
//! Kronecker product `B_1 ⊗ B_2 ⊗ … ⊗ B_K`, so that
//!
//! ```text
//! (B_1 ⊗ … ⊗ B_K) vec(Y) = vec(Y ×_1 B_1ᵀ ×_2 … ×_K B_Kᵀ)
//! ```
//!
//! holds with `×_j` the mode-j product defined below. All axes in this API
//! are 0-based.

use crate::error::{GpError, Result};

/// Tensor dimensions `(n_1, …, n_K)`, every `n_k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(GpError::ShapeMismatch("shape must have rank >= 1".into()));
        }
        if dims.contains(&0) {
            return Err(GpError::ShapeMismatch(format!(
                "all dims must be >= 1, got {dims:?}"
            )));
        }
        let mut size = 1usize;
        for &n in &dims {
            size = size.checked_mul(n).ok_or_else(|| {
                GpError::CapExceeded(format!("tensor size overflows machine word: {dims:?}"))
            })?;
        }
        let _ = size;
        Ok(Shape(dims))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    /// Total number of elements `N = ∏ n_k`.
    pub fn size(&self) -> usize {
        self.0.iter().product()
    }
}

/// Dense row-major matrix. Used for per-factor covariance matrices,
/// eigenvector bases and the brute-force Kronecker reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(GpError::ShapeMismatch("matrix dims must be >= 1".into()));
        }
        if data.len() != rows * cols {
            return Err(GpError::ShapeMismatch(format!(
                "matrix data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(GpError::ShapeMismatch("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(GpError::ShapeMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(GpError::ShapeMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `M·v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(GpError::ShapeMismatch(format!(
                "matvec {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `Mᵀ·v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(GpError::ShapeMismatch(format!(
                "tr_matvec {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    /// Dense Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self.data[ia * self.cols + ja];
                for ib in 0..other.rows {
                    let orow = (ia * other.rows + ib) * out.cols + ja * other.cols;
                    for jb in 0..other.cols {
                        out.data[orow + jb] = a * other.data[ib * other.cols + jb];
                    }
                }
            }
        }
        out
    }

    /// Largest absolute deviation from symmetry, `max |M - Mᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Dense K-dimensional value array in the canonical linearization.
/// Immutable after construction; operations allocate fresh outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.size() {
            return Err(GpError::ShapeMismatch(format!(
                "data length {} != shape size {}",
                data.len(),
                shape.size()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.size();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in canonical order.
    pub fn from_fn<F: FnMut(&[usize]) -> f64>(shape: Shape, mut f: F) -> Self {
        let dims = shape.dims().to_vec();
        let n = shape.size();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn size(&self) -> usize {
        self.data.len()
    }

    /// `vec(·)`: the elements in the canonical linearization.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        let dims = self.shape.dims();
        debug_assert_eq!(idx.len(), dims.len());
        let mut off = 0usize;
        for (i, (&ix, &n)) in idx.iter().zip(dims).enumerate() {
            debug_assert!(ix < n, "index {ix} out of bound {n} at axis {i}");
            off = off * n + ix;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn zip_map<F: FnMut(f64, f64) -> f64>(&self, other: &Tensor, mut f: F) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(GpError::ShapeMismatch(format!(
                "elementwise op on {:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn split_at_axis(&self, axis: usize) -> Result<(usize, usize, usize)> {
        let dims = self.shape.dims();
        if axis >= dims.len() {
            return Err(GpError::AxisOutOfRange {
                axis,
                rank: dims.len(),
            });
        }
        let outer: usize = dims[..axis].iter().product();
        let n = dims[axis];
        let inner: usize = dims[axis + 1..].iter().product();
        Ok((outer, n, inner))
    }

    /// Mode-`axis` unfolding: an `(N/n_axis) × n_axis` matrix whose rows are the
    /// fibers along `axis`, with the complementary indices in canonical order.
    /// For a 2-D tensor, `unfold(0)` is the transpose and `unfold(1)` the
    /// tensor itself.
    pub fn unfold(&self, axis: usize) -> Result<Matrix> {
        let (outer, n, inner) = self.split_at_axis(axis)?;
        let mut m = Matrix::zeros(outer * inner, n);
        for o in 0..outer {
            for c in 0..n {
                let base = (o * n + c) * inner;
                for r in 0..inner {
                    m.data[(o * inner + r) * n + c] = self.data[base + r];
                }
            }
        }
        Ok(m)
    }

    /// Inverse of [`Tensor::unfold`] for the given axis and target shape.
    pub fn fold(m: &Matrix, axis: usize, shape: Shape) -> Result<Tensor> {
        let mut t = Tensor::zeros(shape);
        let (outer, n, inner) = t.split_at_axis(axis)?;
        if m.rows() != outer * inner || m.cols() != n {
            return Err(GpError::ShapeMismatch(format!(
                "fold of {}x{} into dims {:?} along axis {axis}",
                m.rows(),
                m.cols(),
                t.shape.dims()
            )));
        }
        for o in 0..outer {
            for c in 0..n {
                let base = (o * n + c) * inner;
                for r in 0..inner {
                    t.data[base + r] = m.data[(o * inner + r) * n + c];
                }
            }
        }
        Ok(t)
    }

    /// Mode-`axis` product `Z = Y ×_axis B`, defined by `Z^(axis) = Y^(axis)·B`.
    /// `B` must have `n_axis` rows; the result replaces `n_axis` with `B.cols()`.
    pub fn mode_product(&self, b: &Matrix, axis: usize) -> Result<Tensor> {
        let (outer, n, inner) = self.split_at_axis(axis)?;
        if b.rows() != n {
            return Err(GpError::ShapeMismatch(format!(
                "mode-{axis} product: matrix has {} rows, axis has size {n}",
                b.rows()
            )));
        }
        let mut dims = self.shape.dims().to_vec();
        dims[axis] = b.cols();
        let mut out = Tensor::zeros(Shape::new(dims)?);
        let ncols = b.cols();
        for o in 0..outer {
            for m in 0..n {
                let src = &self.data[(o * n + m) * inner..(o * n + m + 1) * inner];
                let brow = b.row(m);
                for c in 0..ncols {
                    let w = brow[c];
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut out.data[(o * ncols + c) * inner..(o * ncols + c + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies `mode_product` sequentially along every axis:
    /// `Y ×_1 B_1 ×_2 … ×_K B_K`. Requires one matrix per axis.
    pub fn multi_mode_product(&self, bs: &[&Matrix]) -> Result<Tensor> {
        if bs.len() != self.shape.rank() {
            return Err(GpError::ShapeMismatch(format!(
                "multi_mode_product needs {} matrices, got {}",
                self.shape.rank(),
                bs.len()
            )));
        }
        let mut cur = self.clone();
        for (axis, b) in bs.iter().enumerate() {
            cur = cur.mode_product(b, axis)?;
        }
        Ok(cur)
    }

    /// Inner product `⟨Y, Z⟩ = ⟨vec(Y), vec(Z)⟩`.
    pub fn inner(&self, other: &Tensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(GpError::ShapeMismatch(format!(
                "inner product on {:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum())
    }

    /// Contracts against a rank-one tensor given by its per-axis factors:
    /// `Σ_idx Y[idx] · ∏_k v_k[idx_k]`. Runs in O(N) with an index odometer.
    pub fn dot_rank_one(&self, factors: &[&[f64]]) -> Result<f64> {
        let dims = self.shape.dims();
        if factors.len() != dims.len() {
            return Err(GpError::ShapeMismatch(format!(
                "rank-one contraction needs {} factors, got {}",
                dims.len(),
                factors.len()
            )));
        }
        for (k, (f, &n)) in factors.iter().zip(dims).enumerate() {
            if f.len() != n {
                return Err(GpError::ShapeMismatch(format!(
                    "rank-one factor {k} has length {}, axis has size {n}",
                    f.len()
                )));
            }
        }
        let k = dims.len();
        let mut idx = vec![0usize; k];
        let mut prefix = vec![1.0f64; k + 1];
        for a in 0..k {
            prefix[a + 1] = prefix[a] * factors[a][0];
        }
        let mut acc = 0.0;
        for &v in &self.data {
            acc += v * prefix[k];
            // advance the odometer, refreshing prefix products from the
            // deepest axis that changed
            let mut axis = k;
            while axis > 0 {
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < dims[axis] {
                    for a in axis..k {
                        prefix[a + 1] = prefix[a] * factors[a][idx[a]];
                    }
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(acc)
    }
}

fn advance(idx: &mut [usize], dims: &[usize]) {
    let mut axis = dims.len();
    while axis > 0 {
        axis -= 1;
        idx[axis] += 1;
        if idx[axis] < dims[axis] {
            return;
        }
        idx[axis] = 0;
    }
}

/// Materializes `B_1 ⊗ B_2 ⊗ … ⊗ B_K` densely.
///
/// Brute-force reference for tests and structure checks; O(N²) memory.
pub fn kron_dense(bs: &[&Matrix]) -> Result<Matrix> {
    let first = *bs
        .first()
        .ok_or_else(|| GpError::ShapeMismatch("kron of empty list".into()))?;
    let mut acc = first.clone();
    for b in &bs[1..] {
        acc = acc.kron(b);
    }
    Ok(acc)
}

/// Applies `(B_1 ⊗ … ⊗ B_K)·v` by materializing the full Kronecker product.
///
/// This is the brute-force oracle for the mode-product identity; it is
/// quadratic in `N` and capped at `N ≤ 10^4` rows/columns.
pub fn kron_apply_reference(bs: &[&Matrix], v: &[f64]) -> Result<Vec<f64>> {
    const CAP: usize = 10_000;
    let rows: usize = bs.iter().map(|b| b.rows()).product();
    let cols: usize = bs.iter().map(|b| b.cols()).product();
    if rows > CAP || cols > CAP {
        return Err(GpError::CapExceeded(format!(
            "kron_apply_reference limited to {CAP} rows/cols, got {rows}x{cols}"
        )));
    }
    if cols != v.len() {
        return Err(GpError::ShapeMismatch(format!(
            "kron operand has {cols} columns, vector has length {}",
            v.len()
        )));
    }
    kron_dense(bs)?.matvec(v)
}
