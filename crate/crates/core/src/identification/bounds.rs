use alloc::format;

use crate::error::{Error, Result};
use crate::model::StabilityProfile;

/// Sample-complexity threshold and the constant-free error rate at `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub t_delta: f64,
    pub gamma_bar: f64,
    pub horizon: usize,
    pub delta: f64,
    /// `√(T_δ / T)`. The true bound carries an unstated absolute constant.
    pub predicted_error: f64,
    /// `T ≥ T_δ`.
    pub feasible: bool,
}

impl BoundReport {
    /// Evaluate `Γ̄`, `T_δ` and the rate for a trajectory of length `horizon`.
    pub fn new(
        profile: &StabilityProfile,
        e_x0_sq: f64,
        sigma_w: f64,
        n: usize,
        m: usize,
        horizon: usize,
        delta: f64,
    ) -> Result<Self> {
        let gamma = gamma_bar(profile, e_x0_sq, sigma_w, n, m, horizon)?;
        let t_delta = sample_complexity(n, m, delta, gamma, sigma_w)?;
        Ok(Self {
            t_delta,
            gamma_bar: gamma,
            horizon,
            delta,
            predicted_error: predicted_rate(t_delta, horizon as f64),
            feasible: horizon as f64 >= t_delta,
        })
    }
}

/// `T_δ = n(m+1) + log(12 Γ̄ / (σ_w² δ)) + log(3/δ)`.
pub fn sample_complexity(n: usize, m: usize, delta: f64, gamma_bar: f64, sigma_w: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(gamma_bar > 0.0) || !(sigma_w > 0.0) || n == 0 || m == 0 {
        return Err(Error::parameter(
            "sample_complexity needs positive n, m, gamma_bar and sigma_w",
        ));
    }
    let dof = (n * (m + 1)) as f64;
    Ok(dof + libm::log(12.0 * gamma_bar / (sigma_w * sigma_w * delta)) + libm::log(3.0 / delta))
}

/// `Γ̄ = C_Ã (√n E‖x_0‖² + σ_w² n T)(m+1)` with `C_Ã = Ĉ_Ã` from `profile`.
pub fn gamma_bar(
    profile: &StabilityProfile,
    e_x0_sq: f64,
    sigma_w: f64,
    n: usize,
    m: usize,
    horizon: usize,
) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::parameter("gamma_bar needs T >= 1"));
    }
    let n_f = n as f64;
    Ok(profile.c_tilde_hat
        * (libm::sqrt(n_f) * e_x0_sq + sigma_w * sigma_w * n_f * horizon as f64)
        * (m + 1) as f64)
}

/// `√(T_δ / T)`.
pub fn predicted_rate(t_delta: f64, horizon: f64) -> f64 {
    libm::sqrt(t_delta / horizon)
}
