//! The bilinear system, its lifted linear-regression form, trajectories and
//! the mean-square stability theory built on the augmented matrix
//! `Ã = A_0 ⊗ A_0 + σ_u² Σ_k A_k ⊗ A_k`.

mod moments;
mod stability;
mod trajectory;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub use moments::{covariance_recursion, second_moment_bound};
pub use stability::{SigmaUMax, StabilityProfile, C_TILDE_EPS, SIGMA_U_CAP};
pub use trajectory::{simulate, simulate_standard_start, RegressionBlocks, Trajectory};

/// `x_{t+1} = A_0 x_t + Σ_{k=1}^m u_t[k] A_k x_t + w_{t+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearSystem {
    n: usize,
    m: usize,
    matrices: Vec<Matrix>,
}

impl BilinearSystem {
    /// `matrices[0]` is `A_0`, `matrices[k]` is `A_k`. Needs at least two
    /// matrices, all square of the same size.
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(Error::parameter(format!(
                "a bilinear system needs A_0 and at least one A_k, got {} matrices",
                matrices.len()
            )));
        }
        let n = matrices[0].rows();
        for (k, a) in matrices.iter().enumerate() {
            if a.shape() != (n, n) {
                return Err(Error::Shape {
                    op: "BilinearSystem::new",
                    expected_rows: n,
                    expected_cols: n,
                    rows: a.rows(),
                    cols: a.cols(),
                });
            }
            if !a.is_finite() {
                return Err(Error::parameter(format!("A_{k} has non-finite entries")));
            }
        }
        Ok(Self {
            n,
            m: matrices.len() - 1,
            matrices,
        })
    }

    /// State dimension.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Input dimension.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of unknowns per state coordinate, `n(m+1)`.
    #[inline]
    pub fn lifted_dim(&self) -> usize {
        self.n * (self.m + 1)
    }

    #[inline]
    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    #[inline]
    pub fn a(&self, k: usize) -> &Matrix {
        &self.matrices[k]
    }

    pub fn into_matrices(self) -> Vec<Matrix> {
        self.matrices
    }

    /// One transition `A_0 x + Σ u[k] A_k x + w`.
    pub fn step(&self, x: &Vector, u: &Vector, w: &Vector) -> Result<Vector> {
        self.check_dims(x, u, w)?;
        let mut out = vec![0.0; self.n];
        let mut scratch = vec![0.0; self.n];
        self.step_into(x.as_slice(), u.as_slice(), w.as_slice(), &mut out, &mut scratch);
        Ok(Vector::from_vec_unchecked(out))
    }

    fn check_dims(&self, x: &Vector, u: &Vector, w: &Vector) -> Result<()> {
        for (name, got, want) in [("x", x.dim(), self.n), ("u", u.dim(), self.m), ("w", w.dim(), self.n)] {
            if got != want {
                return Err(Error::dimension(
                    "step",
                    format!("{name} has dim {got}, expected {want}"),
                ));
            }
        }
        Ok(())
    }

    /// The single code path for the state update; replaying a recorded
    /// trajectory through it reproduces the states bit for bit.
    pub(crate) fn step_into(&self, x: &[f64], u: &[f64], w: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        self.matrices[0].mul_slice_into(x, out);
        for (k, &uk) in u.iter().enumerate() {
            self.matrices[k + 1].mul_slice_into(x, scratch);
            for (o, &s) in out.iter_mut().zip(scratch.iter()) {
                *o += uk * s;
            }
        }
        for (o, &wi) in out.iter_mut().zip(w) {
            *o += wi;
        }
    }

    /// `A_⋆ = [A_0, σ_u A_1, …, σ_u A_m]`, so that
    /// `x_{t+1} = A_⋆ x̃_t + w_{t+1}`.
    pub fn a_star(&self, sigma_u: f64) -> Result<Matrix> {
        check_sigma_u(sigma_u)?;
        let blocks: Vec<Matrix> = self
            .matrices
            .iter()
            .enumerate()
            .map(|(k, a)| if k == 0 { a.clone() } else { a.scaled(sigma_u) })
            .collect();
        Matrix::hcat(&blocks)
    }
}

pub(crate) fn check_sigma_u(sigma_u: f64) -> Result<()> {
    if sigma_u > 0.0 && sigma_u.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(format!("sigma_u must be positive and finite, got {sigma_u}")))
    }
}

/// Input and process-noise standard deviations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    sigma_u: f64,
    sigma_w: f64,
}

impl NoiseParams {
    /// `sigma_w = 0` is accepted for noise-free diagnostics.
    pub fn new(sigma_u: f64, sigma_w: f64) -> Result<Self> {
        check_sigma_u(sigma_u)?;
        if !(sigma_w >= 0.0 && sigma_w.is_finite()) {
            return Err(Error::parameter(format!(
                "sigma_w must be nonnegative and finite, got {sigma_w}"
            )));
        }
        Ok(Self { sigma_u, sigma_w })
    }

    #[inline]
    pub fn sigma_u(&self) -> f64 {
        self.sigma_u
    }

    #[inline]
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }
}

/// Lifted state `x̃ = [1; u/σ_u] ⊗ x`.
pub fn lift_state(x: &Vector, u: &Vector, sigma_u: f64) -> Result<Vector> {
    check_sigma_u(sigma_u)?;
    Ok(Vector::from_vec_unchecked(lift_slices(x.as_slice(), u.as_slice(), sigma_u)))
}

pub(crate) fn lift_slices(x: &[f64], u: &[f64], sigma_u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() * (u.len() + 1));
    out.extend_from_slice(x);
    for &uk in u {
        let scale = uk / sigma_u;
        out.extend(x.iter().map(|xi| scale * xi));
    }
    out
}
