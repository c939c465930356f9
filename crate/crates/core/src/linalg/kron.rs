use alloc::format;

use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Largest Kronecker product [`kron`] will materialize (2^26 entries, 512 MiB).
pub const KRON_ELEMENT_CAP: usize = 1 << 26;

/// Kronecker product `a ⊗ b`: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    kron_with_cap(a, b, KRON_ELEMENT_CAP)
}

pub fn kron_with_cap(a: &Matrix, b: &Matrix, cap: usize) -> Result<Matrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let elements = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
    let (rows, cols) = match (rows, cols, elements) {
        (Some(r), Some(c), Some(e)) if e <= cap => (r, c),
        (_, _, e) => {
            return Err(Error::SizeCap {
                elements: e.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    let (br, bc) = b.shape();
    Ok(Matrix::from_fn(rows, cols, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    }))
}

/// Column-stacking vectorization.
pub fn vec(x: &Matrix) -> Vector {
    Vector::from_vec_unchecked(x.as_slice().to_vec())
}

/// Inverse of [`vec`]: reshape a vector of length `rows * cols` column by column.
pub fn mtx(v: &Vector, rows: usize, cols: usize) -> Result<Matrix> {
    if rows.checked_mul(cols) != Some(v.dim()) {
        return Err(Error::dimension(
            "mtx",
            format!("vector of dim {} into {rows}x{cols}", v.dim()),
        ));
    }
    Matrix::new(rows, cols, v.as_slice().to_vec())
}
