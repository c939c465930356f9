use super::{BilinearSystem, StabilityProfile};
use crate::error::{Error, Result};
use crate::linalg::{mtx, vec, Matrix};

/// `E[x_t x_tᵀ]` propagated from `E[x_0 x_0ᵀ] = sigma0` by
/// `v ← Ã v + σ_w² vec(I_n)`, applied `t` times.
pub fn covariance_recursion(
    sys: &BilinearSystem,
    sigma_u: f64,
    sigma_w: f64,
    sigma0: &Matrix,
    t: usize,
) -> Result<Matrix> {
    let n = sys.n();
    if sigma0.shape() != (n, n) {
        return Err(Error::Shape {
            op: "covariance_recursion",
            expected_rows: n,
            expected_cols: n,
            rows: sigma0.rows(),
            cols: sigma0.cols(),
        });
    }
    let scale = sigma0.frobenius_norm().max(f64::MIN_POSITIVE);
    let asym = sigma0.sub(&sigma0.transpose())?.frobenius_norm();
    if asym > 1e-12 * scale {
        return Err(Error::parameter("initial second moment must be symmetric"));
    }
    if !(sigma_w >= 0.0 && sigma_w.is_finite()) {
        return Err(Error::parameter("sigma_w must be nonnegative"));
    }

    let a = sys.augmented_matrix(sigma_u)?;
    let noise = sigma_w * sigma_w;
    let mut v = vec(sigma0).into_vec();
    let mut next = alloc::vec![0.0; n * n];
    for _ in 0..t {
        a.mul_slice_into(&v, &mut next);
        for i in 0..n {
            next[i * n + i] += noise;
        }
        core::mem::swap(&mut v, &mut next);
    }
    mtx(&crate::linalg::Vector::new(v)?, n, n)?.symmetrized()
}

/// Upper bound on `E‖x_t‖²`:
/// `C ρ^t √n E‖x_0‖² + σ_w² n C Σ_{i<t} ρ^i`, with `C = Ĉ_Ã` and
/// `ρ = ρ(Ã)` from `profile`.
pub fn second_moment_bound(
    profile: &StabilityProfile,
    e_x0_sq: f64,
    sigma_w: f64,
    n: usize,
    t: usize,
) -> f64 {
    let c = profile.c_tilde_hat;
    let rho = profile.rho_tilde;
    let n = n as f64;
    let geometric = if (1.0 - rho).abs() < 1e-12 {
        t as f64
    } else {
        (1.0 - libm::pow(rho, t as f64)) / (1.0 - rho)
    };
    c * libm::pow(rho, t as f64) * libm::sqrt(n) * e_x0_sq + sigma_w * sigma_w * n * c * geometric
}
