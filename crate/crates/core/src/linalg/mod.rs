//! Dense real matrices and the kernels the identification stack is built on.
//!
//! Storage is column-major throughout, so [`vec`] is a copy of the backing
//! buffer and `vec(A X Bᵀ) = (B ⊗ A) vec(X)` holds with the usual [`kron`].

mod kron;
mod lstsq;
mod spectral;
mod svd;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub use kron::{kron, kron_with_cap, mtx, vec, KRON_ELEMENT_CAP};
pub use lstsq::{lstsq, lstsq_with_rtol, Lstsq, RANK_RTOL};
pub use spectral::{
    spectral_radius, ConvergenceWarning, SpectralRadius, DEFAULT_SQUARINGS,
    STABILIZATION_TOL,
};
pub use svd::{condition_number, singular_values};

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Dense column-major `f64` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from column-major entries. Rejects empty shapes, a wrong entry
    /// count and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != rows * cols {
            return Err(Error::dimension(
                "Matrix::new",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Build from row-major entries, the order matrices are usually written in.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != rows * cols {
            return Err(Error::dimension(
                "Matrix::from_row_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        check_finite(data)?;
        Ok(Self::from_fn(rows, cols, |i, j| data[i * cols + j]))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut out = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            out[(i, i)] = d;
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dimension(
                "matmul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.column(j).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.dim() {
            return Err(Error::dimension(
                "mul_vec",
                format!("{}x{} times vector of dim {}", self.rows, self.cols, v.dim()),
            ));
        }
        Ok(Vector(self.mul_slice(v.as_slice())))
    }

    pub(crate) fn mul_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_slice_into(x, &mut out);
        out
    }

    /// `out = self * x`, overwriting `out`.
    pub(crate) fn mul_slice_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
    }

    fn zip_with(&self, rhs: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::dimension(
                op,
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub(crate) fn add_scaled_in_place(&mut self, factor: f64, rhs: &Matrix) {
        debug_assert_eq!(self.shape(), rhs.shape());
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += factor * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::dimension("symmetrized", "matrix is not square"));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        }))
    }

    /// Horizontal concatenation `[B_0 B_1 ...]`.
    pub fn hcat(blocks: &[Matrix]) -> Result<Matrix> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::dimension("hcat", "no blocks"))?;
        let rows = first.rows;
        if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::dimension(
                "hcat",
                format!("block with {} rows among blocks with {rows}", bad.rows),
            ));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Columns `start..start + count` as a new matrix.
    pub fn column_block(&self, start: usize, count: usize) -> Result<Matrix> {
        if count == 0 || start + count > self.cols {
            return Err(Error::dimension(
                "column_block",
                format!("columns {start}..{} of {}", start + count, self.cols),
            ));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: count,
            data: self.data[start * self.rows..(start + count) * self.rows].to_vec(),
        })
    }

    /// Rows as vectors, mostly useful for building design matrices in tests.
    pub fn from_rows(rows: &[Vector]) -> Result<Matrix> {
        let first = rows
            .first()
            .ok_or_else(|| Error::dimension("from_rows", "no rows"))?;
        let cols = first.dim();
        if rows.iter().any(|r| r.dim() != cols) {
            return Err(Error::dimension("from_rows", "rows of unequal length"));
        }
        Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Dense real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDimension);
        }
        check_finite(&data)?;
        Ok(Self(data))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self(vec![0.0; dim])
    }

    /// Unit vector `e_i` in `dim` dimensions.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        debug_assert!(!data.is_empty());
        Self(data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(dot(&self.0, &self.0))
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
