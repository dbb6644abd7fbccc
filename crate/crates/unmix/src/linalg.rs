//! Minimal dense real linear algebra: just what the ADMM solvers need.
//!
//! Matrices are row-major and immutable after construction. The design
//! envelope is libraries with at most a few thousand signatures, so there
//! are no blocked or sparse kernels.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    /// Builds a matrix, rejecting length mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "DenseMatrix::new",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::new"));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Matrix-vector product `M v`.
    pub fn matvec(&self, v: &DenseVector<T>) -> Result<DenseVector<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matvec",
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = DenseVector::zeros(self.rows);
        self.matvec_into(v.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, v: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            // Four independent accumulators break the FMA dependency chain
            // so the compiler can pipeline/vectorize the dot product.
            let mut acc = [T::zero(); 4];
            let mut chunks_a = row.chunks_exact(4);
            let mut chunks_b = v.chunks_exact(4);
            for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
                for t in 0..4 {
                    acc[t] += ca[t] * cb[t];
                }
            }
            let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
            for (a, b) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
                total += *a * *b;
            }
            *o = total;
        }
    }

    /// Transposed product `Mᵀ v`.
    pub fn matvec_t(&self, v: &DenseVector<T>) -> Result<DenseVector<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "matvec_t",
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = DenseVector::zeros(self.cols);
        self.matvec_t_into(v.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn matvec_t_into(&self, v: &[T], out: &mut [T]) {
        for o in out.iter_mut() {
            *o = T::zero();
        }
        for (i, vi) in v.iter().enumerate() {
            let row = self.row(i);
            for (o, a) in out.iter_mut().zip(row) {
                *o += *a * *vi;
            }
        }
    }

    /// `AᵀA + c·I`, exactly symmetric (the upper triangle is computed once
    /// and mirrored).
    pub fn gram_plus_diag(&self, c: T) -> DenseMatrix<T> {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for r in 0..self.rows {
                    acc += self.get(r, i) * self.get(r, j);
                }
                if i == j {
                    acc += c;
                }
                g.data[i * n + j] = acc;
                g.data[j * n + i] = acc;
            }
        }
        g
    }
}

/// Dense vector of real scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<T>(Vec<T>);

impl<T: Real> DenseVector<T> {
    /// Builds a vector, rejecting non-finite entries.
    pub fn new(data: Vec<T>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DenseVector::new"));
        }
        Ok(Self(data))
    }

    pub(crate) fn from_raw(data: Vec<T>) -> Self {
        Self(data)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![T::zero(); len])
    }

    pub fn from_elem(len: usize, v: T) -> Self {
        Self(vec![v; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| *a * *b)
            .sum()
    }

    pub fn norm2_sq(&self) -> T {
        self.0.iter().map(|v| *v * *v).sum()
    }

    pub fn norm2(&self) -> T {
        self.norm2_sq().sqrt()
    }

    pub fn norm1(&self) -> T {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.0.iter().fold(T::infinity(), |acc, v| acc.min(*v))
    }

    /// `self + a * other`, elementwise.
    pub fn axpy(&self, a: T, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| *x + a * *y)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-T::one(), other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(T::one(), other)
    }

    pub fn scale(&self, a: T) -> Self {
        Self(self.0.iter().map(|x| *x * a).collect())
    }

    /// Euclidean distance to `other`.
    pub fn dist2(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let d = *a - *b;
                d * d
            })
            .sum::<T>()
            .sqrt()
    }
}

impl<T> std::ops::Index<usize> for DenseVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> std::ops::IndexMut<usize> for DenseVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactorization<T> {
    dim: usize,
    // Row-major lower triangle, full square storage for simple indexing.
    factor: Vec<T>,
}

impl<T: Real> SpdFactorization<T> {
    /// Factorizes a symmetric matrix, `M = L Lᵀ`. Fails with
    /// [`Error::NotPositiveDefinite`] on a non-positive pivot.
    pub fn factorize(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                context: "spd_factorize",
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let n = m.rows();
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = m.get(j, j);
            for t in 0..j {
                d -= l[j * n + t] * l[j * n + t];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: d.to_f64().unwrap_or(f64::NAN),
                });
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut acc = m.get(i, j);
                for t in 0..j {
                    acc -= l[i * n + t] * l[j * n + t];
                }
                l[i * n + j] = acc / dj;
            }
        }
        Ok(Self { dim: n, factor: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn factor_entry(&self, i: usize, j: usize) -> T {
        if j <= i {
            self.factor[i * self.dim + j]
        } else {
            T::zero()
        }
    }

    /// Explicit `M⁻¹`, column by column. The solver hot loops apply the
    /// inverse as a matrix–vector product: same flop count as the two
    /// triangular solves but contiguous row-major access.
    pub fn inverse(&self) -> DenseMatrix<T> {
        let n = self.dim;
        let mut data = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for (i, &v) in col.iter().enumerate() {
                data[i * n + j] = v;
            }
        }
        DenseMatrix::new(n, n, data).expect("square inverse dimensions")
    }

    /// Solves `M z = b`.
    pub fn solve(&self, b: &DenseVector<T>) -> Result<DenseVector<T>> {
        if b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "spd_solve",
                expected: self.dim,
                got: b.len(),
            });
        }
        let mut z = b.clone();
        self.solve_in_place(z.as_mut_slice());
        Ok(z)
    }

    /// In-place variant of [`solve`](Self::solve) for hot loops.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim;
        debug_assert_eq!(b.len(), n);
        // Forward: L c = b.
        for i in 0..n {
            let mut acc = b[i];
            let row = &self.factor[i * n..i * n + i];
            for (t, lt) in row.iter().enumerate() {
                acc -= *lt * b[t];
            }
            b[i] = acc / self.factor[i * n + i];
        }
        // Backward: Lᵀ z = c.
        for i in (0..n).rev() {
            let mut acc = b[i];
            for t in (i + 1)..n {
                acc -= self.factor[t * n + i] * b[t];
            }
            b[i] = acc / self.factor[i * n + i];
        }
    }
}

/// Relative residual tolerance used by the factorization round-trip checks.
pub fn solve_residual_bound<T: Real>(b_inf: T) -> T {
    lit::<T>(1e-8) * (T::one() + b_inf)
}
