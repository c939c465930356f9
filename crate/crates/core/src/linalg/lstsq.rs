use alloc::vec::Vec;

use super::{singular_values, Matrix};
use crate::error::{Error, Result};

/// Relative singular-value threshold below which a design is rank deficient.
pub const RANK_RTOL: f64 = 1e-10;

/// Least-squares solution together with the diagnostics computed on the way.
#[derive(Clone, Debug)]
pub struct Lstsq {
    /// `d × n` minimizer of `‖targets − design · coefficients‖_F`.
    pub coefficients: Matrix,
    /// Singular values of the design, descending (taken from the `R` factor).
    pub singular_values: Vec<f64>,
    /// Frobenius norm of the residual `targets − design · coefficients`.
    pub residual_norm: f64,
}

impl Lstsq {
    pub fn condition_number(&self) -> f64 {
        super::condition_number(&self.singular_values).unwrap_or(f64::INFINITY)
    }
}

pub fn lstsq(design: &Matrix, targets: &Matrix) -> Result<Lstsq> {
    lstsq_with_rtol(design, targets, RANK_RTOL)
}

/// Householder-QR least squares for every column of `targets` at once.
pub fn lstsq_with_rtol(design: &Matrix, targets: &Matrix, rtol: f64) -> Result<Lstsq> {
    let (t, d) = design.shape();
    let n = targets.cols();
    if targets.rows() != t {
        return Err(Error::dimension(
            "lstsq",
            alloc::format!("design has {t} rows, targets have {}", targets.rows()),
        ));
    }
    if t < d {
        return Err(Error::RankDeficient { rank: t, cols: d });
    }

    let mut r = design.clone();
    let mut qty = targets.clone();
    let mut v = Vec::with_capacity(t);

    for j in 0..d {
        let col = &r.column(j)[j..];
        let norm = super::norm(col);
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        v.clear();
        v.extend_from_slice(col);
        v[0] -= alpha;
        let vtv = super::dot(&v, &v);
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;

        {
            let cj = &mut r.column_mut(j)[j..];
            cj[0] = alpha;
            cj[1..].iter_mut().for_each(|x| *x = 0.0);
        }
        for k in (j + 1)..d {
            reflect(&mut r.column_mut(k)[j..], &v, beta);
        }
        for k in 0..n {
            reflect(&mut qty.column_mut(k)[j..], &v, beta);
        }
    }

    let upper = Matrix::from_fn(d, d, |i, k| if i <= k { r[(i, k)] } else { 0.0 });
    let sv = singular_values(&upper);
    let largest = sv[0];
    let rank = sv.iter().filter(|&&s| s > rtol * largest).count();
    if largest == 0.0 || rank < d {
        return Err(Error::RankDeficient { rank, cols: d });
    }

    let mut coefficients = Matrix::zeros(d, n);
    for k in 0..n {
        let rhs = qty.column(k);
        let out = coefficients.column_mut(k);
        for i in (0..d).rev() {
            let mut acc = rhs[i];
            for l in (i + 1)..d {
                acc -= upper[(i, l)] * out[l];
            }
            out[i] = acc / upper[(i, i)];
        }
    }

    let residual_norm = libm::sqrt(
        (0..n)
            .map(|k| qty.column(k)[d..].iter().map(|x| x * x).sum::<f64>())
            .sum(),
    );

    Ok(Lstsq {
        coefficients,
        singular_values: sv,
        residual_norm,
    })
}

#[inline]
fn reflect(x: &mut [f64], v: &[f64], beta: f64) {
    let s = beta * super::dot(v, x);
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}
