//! Least-squares estimation of `{A_k}` from one trajectory, and the
//! finite-sample error bound that goes with it.

mod bounds;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix};
use crate::model::{check_sigma_u, BilinearSystem, Trajectory};

pub use bounds::{gamma_bar, predicted_rate, sample_complexity, BoundReport};

/// `‖Â_k − A_k‖ / ‖A_k‖`, or the absolute error when `A_k = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedError {
    pub value: f64,
    /// Set when `‖A_k‖ = 0` and `value` is the absolute error instead.
    pub absolute_fallback: bool,
}

#[derive(Clone, Debug)]
pub struct EstimationResult {
    /// `Â_0, …, Â_m`.
    pub a_hat: Vec<Matrix>,
    /// The raw least-squares solution `Â = [Â_0, σ_u Â_1, …]`, `n × n(m+1)`.
    pub a_star_hat: Matrix,
    pub sigma_u: f64,
    /// Rows of the regression (`T`).
    pub samples: usize,
    /// `‖Â_k − A_k‖`, filled by [`error_metrics`].
    pub spectral_errors: Option<Vec<f64>>,
    pub normalized_errors: Option<Vec<NormalizedError>>,
    /// `max{‖Â_0 − A_0‖, σ_u ‖Â_k − A_k‖}`.
    pub composite_error: Option<f64>,
    /// Condition number of `X̃_T`.
    pub design_condition: f64,
    /// `‖Y_T − X̃_T Âᵀ‖_F`.
    pub residual_norm: f64,
}

impl EstimationResult {
    pub fn n(&self) -> usize {
        self.a_star_hat.rows()
    }

    pub fn m(&self) -> usize {
        self.a_hat.len() - 1
    }

    /// Estimated system `{Â_k}`.
    pub fn system(&self) -> Result<BilinearSystem> {
        BilinearSystem::new(self.a_hat.clone())
    }

    /// `‖Â_0 − A_0‖ / ‖A_0‖`.
    pub fn err0_normalized(&self) -> Option<f64> {
        self.normalized_errors.as_ref().map(|e| e[0].value)
    }

    /// `(1/m) Σ_k ‖Â_k − A_k‖ / ‖A_k‖`.
    pub fn errk_avg_normalized(&self) -> Option<f64> {
        self.normalized_errors
            .as_ref()
            .map(|e| e[1..].iter().map(|x| x.value).sum::<f64>() / (e.len() - 1) as f64)
    }

    /// Plug-in noise level `‖residual‖_F / √(T n)`.
    pub fn noise_std_estimate(&self) -> f64 {
        self.residual_norm / libm::sqrt((self.samples * self.n()) as f64)
    }
}

/// Ordinary least squares on the lifted regression `Y_T = X̃_T A_⋆ᵀ + W_T`.
pub fn estimate(traj: &Trajectory) -> Result<EstimationResult> {
    let blocks = traj.regression_blocks()?;
    let (rows, cols) = blocks.design.shape();
    if rows < cols {
        return Err(Error::Underdetermined { rows, cols });
    }
    let sigma_u = traj.params().sigma_u();
    let solution = lstsq(&blocks.design, &blocks.targets)?;
    let a_star_hat = solution.coefficients.transpose();
    let a_hat = unpack(&a_star_hat, sigma_u)?;
    let design_condition = solution.condition_number();
    Ok(EstimationResult {
        a_hat,
        a_star_hat,
        sigma_u,
        samples: rows,
        spectral_errors: None,
        normalized_errors: None,
        composite_error: None,
        design_condition,
        residual_norm: solution.residual_norm,
    })
}

/// Split `[B_0, B_1, …, B_m]` into `{B_0, B_1/σ_u, …, B_m/σ_u}`.
pub fn unpack(a_star: &Matrix, sigma_u: f64) -> Result<Vec<Matrix>> {
    check_sigma_u(sigma_u)?;
    let (n, cols) = a_star.shape();
    if cols % n != 0 || cols / n < 2 {
        return Err(Error::dimension(
            "unpack",
            format!("{n}x{cols} is not n x n(m+1) with m >= 1"),
        ));
    }
    (0..cols / n)
        .map(|k| {
            let block = a_star.column_block(k * n, n)?;
            Ok(if k == 0 { block } else { block.scaled(1.0 / sigma_u) })
        })
        .collect()
}

/// Fill spectral, normalized and composite errors against `truth`.
pub fn error_metrics(mut result: EstimationResult, truth: &BilinearSystem) -> Result<EstimationResult> {
    if truth.n() != result.n() || truth.m() != result.m() {
        return Err(Error::dimension(
            "error_metrics",
            format!(
                "estimate is (n={}, m={}), truth is (n={}, m={})",
                result.n(),
                result.m(),
                truth.n(),
                truth.m()
            ),
        ));
    }
    let mut spectral = Vec::with_capacity(result.a_hat.len());
    let mut normalized = Vec::with_capacity(result.a_hat.len());
    for (est, a) in result.a_hat.iter().zip(truth.matrices()) {
        let err = est.sub(a)?.spectral_norm();
        let scale = a.spectral_norm();
        spectral.push(err);
        normalized.push(if scale > 0.0 {
            NormalizedError {
                value: err / scale,
                absolute_fallback: false,
            }
        } else {
            NormalizedError {
                value: err,
                absolute_fallback: true,
            }
        });
    }
    let composite = spectral[1..]
        .iter()
        .map(|e| result.sigma_u * e)
        .fold(spectral[0], f64::max);
    result.spectral_errors = Some(spectral);
    result.normalized_errors = Some(normalized);
    result.composite_error = Some(composite);
    Ok(result)
}
