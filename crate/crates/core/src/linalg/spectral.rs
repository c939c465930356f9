use alloc::vec::Vec;

use super::Matrix;
use crate::error::{Error, Result};

/// Default cap on the number of squarings (`A^(2^K)` with `K = 48`).
pub const DEFAULT_SQUARINGS: usize = 48;

/// Successive estimates closer than this (relative to `max(ρ̂, 1)`) count as
/// stabilized; anything looser at the cap raises a [`ConvergenceWarning`].
pub const STABILIZATION_TOL: f64 = 1e-6;

/// Relative change at which squaring stops early.
const STAGNATION_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceWarning {
    pub squarings: usize,
    pub last_change: f64,
}

/// Gelfand estimate of a spectral radius.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralRadius {
    pub value: f64,
    /// `ρ̂_k = ‖A^(2^k)‖_F^(1/2^k)` for `k = 0..=K`.
    pub sequence: Vec<f64>,
    pub warning: Option<ConvergenceWarning>,
}

/// `ρ(A) = lim ‖A^N‖^(1/N)`, evaluated at `N = 2^k` by repeated squaring.
///
/// Each squared iterate is renormalized to unit Frobenius norm and the
/// logarithm of the scale is accumulated separately, so neither overflow nor
/// underflow limits the number of squarings. Complex eigenvalue pairs and
/// defective eigenvalues are handled without any eigensolver; the error at
/// step `k` decays like `log(N)/N`.
pub fn spectral_radius(a: &Matrix, iterations: usize) -> Result<SpectralRadius> {
    if !a.is_square() {
        return Err(Error::dimension("spectral_radius", "matrix is not square"));
    }
    if iterations == 0 {
        return Err(Error::parameter("spectral_radius needs at least one squaring"));
    }

    let norm0 = a.frobenius_norm();
    let mut sequence = Vec::with_capacity(iterations + 1);
    sequence.push(norm0);
    if norm0 == 0.0 {
        return Ok(SpectralRadius {
            value: 0.0,
            sequence,
            warning: None,
        });
    }

    // A^(2^k) = exp(2^k * log_rho) * b, with ‖b‖_F = 1.
    let mut b = a.scaled(1.0 / norm0);
    let mut log_rho = libm::log(norm0);
    let mut weight = 1.0;
    let mut last_change = f64::INFINITY;

    for _ in 0..iterations {
        let sq = b.mul_unchecked(&b);
        let s = sq.frobenius_norm();
        weight *= 0.5;
        if s == 0.0 {
            sequence.push(0.0);
            return Ok(SpectralRadius {
                value: 0.0,
                sequence,
                warning: None,
            });
        }
        log_rho += weight * libm::log(s);
        b = sq.scaled(1.0 / s);

        let prev = *sequence.last().unwrap();
        let est = libm::exp(log_rho);
        sequence.push(est);
        last_change = (est - prev).abs();
        if last_change <= STAGNATION_TOL * est {
            break;
        }
    }

    let value = *sequence.last().unwrap();
    let warning = (last_change > STABILIZATION_TOL * value.max(1.0)).then(|| ConvergenceWarning {
        squarings: sequence.len() - 1,
        last_change,
    });
    Ok(SpectralRadius {
        value,
        sequence,
        warning,
    })
}
