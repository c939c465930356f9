use super::{check_sigma_u, BilinearSystem};
use crate::error::{Error, Result};
use crate::linalg::{kron, spectral_radius, ConvergenceWarning, Matrix, DEFAULT_SQUARINGS};

/// Floor on `ρ(Ã)` in the denominator of `Ĉ_Ã`.
pub const C_TILDE_EPS: f64 = 1e-12;

/// Input strengths beyond this are reported as unbounded by
/// [`BilinearSystem::sigma_u_max`].
pub const SIGMA_U_CAP: f64 = 1e6;

/// Mean-square stability summary of a system at a fixed input strength.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityProfile {
    /// `ρ(Ã)`.
    pub rho_tilde: f64,
    /// `Ĉ_Ã = max_{0≤t≤horizon} ‖Ã^t‖ / max(ρ, ε)^t`, at least 1.
    ///
    /// The transient constant in the second-moment bound has no closed form;
    /// this is the smallest constant that makes `‖Ã^t‖ ≤ C ρ^t` hold on the
    /// inspected horizon.
    pub c_tilde_hat: f64,
    pub horizon_used: usize,
    pub warning: Option<ConvergenceWarning>,
}

/// Result of the admissible-input-strength search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaUMax {
    Bounded(f64),
    /// `ρ(Ã(σ_u)) ≤ 1` held all the way to [`SIGMA_U_CAP`].
    Unbounded,
}

impl BilinearSystem {
    /// `Ã = A_0 ⊗ A_0 + σ_u² Σ_k A_k ⊗ A_k`, the map `vec E[x_t x_tᵀ] ↦
    /// vec E[x_{t+1} x_{t+1}ᵀ]` (noise-free part) under Gaussian inputs.
    pub fn augmented_matrix(&self, sigma_u: f64) -> Result<Matrix> {
        check_sigma_u(sigma_u)?;
        self.augmented_unchecked(sigma_u)
    }

    pub(crate) fn augmented_unchecked(&self, sigma_u: f64) -> Result<Matrix> {
        let mut out = kron(self.a(0), self.a(0))?;
        let s2 = sigma_u * sigma_u;
        if s2 > 0.0 {
            for a in &self.matrices()[1..] {
                out.add_scaled_in_place(s2, &kron(a, a)?);
            }
        }
        Ok(out)
    }

    /// `ρ(Ã(σ_u))`.
    pub fn rho_tilde(&self, sigma_u: f64) -> Result<f64> {
        let a = self.augmented_matrix(sigma_u)?;
        Ok(spectral_radius(&a, DEFAULT_SQUARINGS)?.value)
    }

    pub fn stability_profile(&self, sigma_u: f64, horizon: usize) -> Result<StabilityProfile> {
        if horizon < 1 {
            return Err(Error::parameter("stability_profile needs horizon >= 1"));
        }
        let a = self.augmented_matrix(sigma_u)?;
        let rho = spectral_radius(&a, DEFAULT_SQUARINGS)?;
        let log_base = libm::log(rho.value.max(C_TILDE_EPS));

        let mut c_hat: f64 = 1.0;
        let mut power = a.clone();
        for t in 1..=horizon {
            let norm = power.spectral_norm();
            if norm > 0.0 {
                let ratio = libm::exp(libm::log(norm) - t as f64 * log_base);
                c_hat = c_hat.max(ratio);
            }
            if t < horizon {
                power = power.mul_unchecked(&a);
            }
        }

        Ok(StabilityProfile {
            rho_tilde: rho.value,
            c_tilde_hat: c_hat,
            horizon_used: horizon,
            warning: rho.warning,
        })
    }

    /// Largest `σ_u` with `ρ(Ã(σ_u)) ≤ 1`, located by bisection to within `tol`.
    ///
    /// `σ_u ↦ ρ(Ã(σ_u))` is nondecreasing (Ã is a sum of completely positive
    /// maps with σ_u² weighting), so a doubling search brackets the crossing.
    pub fn sigma_u_max(&self, tol: f64) -> Result<SigmaUMax> {
        if !(tol > 0.0) {
            return Err(Error::parameter("sigma_u_max tolerance must be positive"));
        }
        let rho_at = |s: f64| -> Result<f64> {
            Ok(spectral_radius(&self.augmented_unchecked(s)?, DEFAULT_SQUARINGS)?.value)
        };

        let rho0 = rho_at(0.0)?;
        if rho0 > 1.0 {
            return Err(Error::Infeasible { rho: rho0 });
        }

        let mut lo = 0.0;
        let mut hi = 1.0;
        while rho_at(hi)? <= 1.0 {
            lo = hi;
            hi *= 2.0;
            if hi > SIGMA_U_CAP {
                return Ok(SigmaUMax::Unbounded);
            }
        }
        while hi - lo >= tol {
            let mid = 0.5 * (lo + hi);
            if rho_at(mid)? <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(SigmaUMax::Bounded(0.5 * (lo + hi)))
    }
}
