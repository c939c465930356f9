//! Monte-Carlo checks of the block martingale small-ball (BMSB) property of
//! the lifted state `x̃_t = ũ_t ⊗ x_t`, with block length 1.
//!
//! Fix a filtration state `(x_j, u_j)` and a unit direction
//! `v = [v_0; v_1; …; v_m]` in `R^{n(m+1)}`, and let `V = [v_1 … v_m]`. With
//! `ū = u_{j+1}/σ_u ~ N(0, I_m)` and `w = w_{j+1} ~ N(0, σ_w² I_n)`,
//!
//! ```text
//! Z_{j+1} = ⟨v, x̃_{j+1}⟩ = ⟨v_0 + V ū, A_⋆ x̃_j + w⟩.
//! ```
//!
//! The lower bound `P(|Z| ≥ σ_w/2 | F_j) ≥ 9/320` is the product of
//! `P(E_w | E_u) ≥ 3/10` and `P(E_u) ≥ 3/32`, and the latter rests on
//! `P(‖Vū‖² ≥ ‖V‖_F²/4) ≥ 3/16`. Each piece has its own estimator here.
//!
//! Draws are taken in batches, each from its own keyed substream, so an
//! estimate depends only on `(seed, samples)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix, Vector};
use crate::model::{lift_state, BilinearSystem, NoiseParams};
use crate::rng::{GaussianStream, Role};

/// Level multiplier `c` in `ν = c σ_w ‖v‖`.
pub const SMALL_BALL_LEVEL: f64 = 0.5;
pub const P_SMALL_BALL: f64 = 9.0 / 320.0;
pub const P_EVENT_U: f64 = 3.0 / 32.0;
pub const P_EVENT_W_GIVEN_U: f64 = 3.0 / 10.0;
pub const P_PALEY_ZYGMUND: f64 = 3.0 / 16.0;

/// Standard normal 99% quantile, for one-sided 99% confidence bounds.
pub const Z_99: f64 = 2.326_347_874_040_840_8;

pub const DEFAULT_SAMPLES: usize = 100_000;
/// Minimum number of `E_u` draws before a conditional estimate is reported.
pub const MIN_CONDITIONING_EVENTS: usize = 100;

const BATCH: usize = 4096;
const UNIT_TOL: f64 = 1e-10;

/// Monte-Carlo estimate of a probability against a lower threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct BmsbEstimate {
    pub probability: f64,
    /// `√(p̂(1 − p̂)/samples)`.
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
    pub threshold: f64,
    /// One-sided 99% Wilson lower confidence bound on the probability.
    pub lower_bound: f64,
    /// `p̂ − 3·SE ≥ threshold` or `lower_bound ≥ threshold`.
    pub passed: bool,
}

impl BmsbEstimate {
    pub fn from_counts(hits: usize, samples: usize, threshold: f64) -> Self {
        let p = hits as f64 / samples as f64;
        let std_error = libm::sqrt(p * (1.0 - p) / samples as f64);
        let lower_bound = wilson_lower_bound(hits, samples, Z_99);
        Self {
            probability: p,
            std_error,
            samples,
            hits,
            threshold,
            lower_bound,
            passed: p - 3.0 * std_error >= threshold || lower_bound >= threshold,
        }
    }
}

/// Wilson score lower bound for a binomial proportion.
pub fn wilson_lower_bound(hits: usize, samples: usize, z: f64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((centre - spread) / (1.0 + z2 / n)).max(0.0)
}

/// The `F_j`-measurable part of the process: `x_j` and `u_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationState {
    pub x: Vector,
    pub u: Vector,
}

/// `v_0` and `V = [v_1 … v_m]` from a direction of length `n(m+1)`.
pub fn split_direction(v: &Vector, n: usize) -> Result<(Vec<f64>, Matrix)> {
    if n == 0 || v.dim() % n != 0 || v.dim() / n < 2 {
        return Err(Error::dimension(
            "split_direction",
            format!("direction of dim {} is not n(m+1) for n = {n}, m >= 1", v.dim()),
        ));
    }
    let m = v.dim() / n - 1;
    let s = v.as_slice();
    let big_v = Matrix::new(n, m, s[n..].to_vec())?;
    Ok((s[..n].to_vec(), big_v))
}

fn check_unit(v: &Vector) -> Result<()> {
    let nv = v.norm();
    if (nv - 1.0).abs() > UNIT_TOL {
        return Err(Error::parameter(format!("direction must have unit norm, got {nv}")));
    }
    Ok(())
}

fn check_noise(noise: &NoiseParams) -> Result<()> {
    if noise.sigma_w() > 0.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "sigma_w = 0 makes the small-ball bound vacuous",
        ))
    }
}

/// Run `samples` draws split into keyed batches, calling `draw` once per sample.
fn for_each_draw(seed: u64, role: Role, samples: usize, mut draw: impl FnMut(&mut GaussianStream)) {
    let batches = samples.div_ceil(BATCH);
    for b in 0..batches {
        let mut stream = GaussianStream::keyed(seed, &[role as u64, b as u64]);
        let count = BATCH.min(samples - b * BATCH);
        for _ in 0..count {
            draw(&mut stream);
        }
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(Error::parameter("need at least one sample"))
    } else {
        Ok(())
    }
}

/// Shared setup: `v_0`, `V`, the conditional mean `A_⋆ x̃_j`.
struct Conditional {
    v0: Vec<f64>,
    big_v: Matrix,
    mean: Vec<f64>,
    sigma_w: f64,
}

impl Conditional {
    fn new(sys: &BilinearSystem, noise: &NoiseParams, state: &FiltrationState, v: &Vector) -> Result<Self> {
        check_noise(noise)?;
        if v.dim() != sys.lifted_dim() {
            return Err(Error::dimension(
                "bmsb",
                format!("direction has dim {}, expected {}", v.dim(), sys.lifted_dim()),
            ));
        }
        if state.x.dim() != sys.n() || state.u.dim() != sys.m() {
            return Err(Error::dimension("bmsb", "filtration state does not match the system"));
        }
        let (v0, big_v) = split_direction(v, sys.n())?;
        let lifted = lift_state(&state.x, &state.u, noise.sigma_u())?;
        let mean = sys.a_star(noise.sigma_u())?.mul_vec(&lifted)?.into_vec();
        Ok(Self {
            v0,
            big_v,
            mean,
            sigma_w: noise.sigma_w(),
        })
    }

    /// Draw `(ū, w)`; fill `q = v_0 + V ū` and `p = A_⋆ x̃_j + w`.
    fn draw(&self, stream: &mut GaussianStream, ubar: &mut [f64], q: &mut [f64], p: &mut [f64]) {
        stream.fill_normal(ubar);
        self.big_v.mul_slice_into(ubar, q);
        for (qi, &v0i) in q.iter_mut().zip(&self.v0) {
            *qi += v0i;
        }
        for (pi, &mi) in p.iter_mut().zip(&self.mean) {
            *pi = mi + self.sigma_w * stream.next_normal();
        }
    }
}

/// `P(|Z_{j+1}| ≥ σ_w/2 | F_j)` against `9/320`.
pub fn bmsb_check(
    sys: &BilinearSystem,
    noise: NoiseParams,
    state: &FiltrationState,
    v: &Vector,
    samples: usize,
    seed: u64,
) -> Result<BmsbEstimate> {
    check_unit(v)?;
    check_samples(samples)?;
    let cond = Conditional::new(sys, &noise, state, v)?;
    let level = SMALL_BALL_LEVEL * noise.sigma_w() * v.norm();
    let (n, m) = (sys.n(), sys.m());
    let (mut ubar, mut q, mut p) = (vec![0.0; m], vec![0.0; n], vec![0.0; n]);
    let mut hits = 0;
    for_each_draw(seed, Role::MonteCarlo, samples, |s| {
        cond.draw(s, &mut ubar, &mut q, &mut p);
        if dot(&q, &p).abs() >= level {
            hits += 1;
        }
    });
    Ok(BmsbEstimate::from_counts(hits, samples, P_SMALL_BALL))
}

/// `P(‖v_0 + V ū‖ ≥ ‖v‖/2)` against `3/32`, for `v` of length `n(m+1)`.
pub fn event_u_check(v: &Vector, n: usize, samples: usize, seed: u64) -> Result<BmsbEstimate> {
    check_unit(v)?;
    check_samples(samples)?;
    let (v0, big_v) = split_direction(v, n)?;
    let level = SMALL_BALL_LEVEL * v.norm();
    let (mut ubar, mut q) = (vec![0.0; big_v.cols()], vec![0.0; n]);
    let mut hits = 0;
    for_each_draw(seed, Role::Input, samples, |s| {
        s.fill_normal(&mut ubar);
        big_v.mul_slice_into(&ubar, &mut q);
        for (qi, &v0i) in q.iter_mut().zip(&v0) {
            *qi += v0i;
        }
        if norm(&q) >= level {
            hits += 1;
        }
    });
    Ok(BmsbEstimate::from_counts(hits, samples, P_EVENT_U))
}

/// `P(|⟨q, A_⋆ x̃_j + w⟩| ≥ σ_w ‖q‖ | E_u)` with `q = v_0 + V ū`, against `3/10`.
///
/// `samples` counts all draws; only those landing in `E_u` enter the estimate.
pub fn event_w_given_u_check(
    sys: &BilinearSystem,
    noise: NoiseParams,
    state: &FiltrationState,
    v: &Vector,
    samples: usize,
    seed: u64,
) -> Result<BmsbEstimate> {
    check_unit(v)?;
    check_samples(samples)?;
    let cond = Conditional::new(sys, &noise, state, v)?;
    let level_u = SMALL_BALL_LEVEL * v.norm();
    let (n, m) = (sys.n(), sys.m());
    let (mut ubar, mut q, mut p) = (vec![0.0; m], vec![0.0; n], vec![0.0; n]);
    let (mut conditioned, mut hits) = (0usize, 0usize);
    for_each_draw(seed, Role::Noise, samples, |s| {
        cond.draw(s, &mut ubar, &mut q, &mut p);
        let qn = norm(&q);
        if qn >= level_u {
            conditioned += 1;
            if dot(&q, &p).abs() >= noise.sigma_w() * qn {
                hits += 1;
            }
        }
    });
    if conditioned < MIN_CONDITIONING_EVENTS {
        return Err(Error::InsufficientConditioning {
            hits: conditioned,
            required: MIN_CONDITIONING_EVENTS,
        });
    }
    Ok(BmsbEstimate::from_counts(hits, conditioned, P_EVENT_W_GIVEN_U))
}

/// `P(‖V ū‖² ≥ ‖V‖_F²/4)` against `3/16`.
pub fn paley_zygmund_check(big_v: &Matrix, samples: usize, seed: u64) -> Result<BmsbEstimate> {
    check_samples(samples)?;
    let frob = big_v.frobenius_norm();
    let frob_sq = frob * frob;
    if frob_sq == 0.0 {
        return Err(Error::parameter("V = 0 has no excitation to bound"));
    }
    let level = 0.25 * frob_sq;
    let (mut ubar, mut y) = (vec![0.0; big_v.cols()], vec![0.0; big_v.rows()]);
    let mut hits = 0;
    for_each_draw(seed, Role::Direction, samples, |s| {
        s.fill_normal(&mut ubar);
        big_v.mul_slice_into(&ubar, &mut y);
        if dot(&y, &y) >= level {
            hits += 1;
        }
    });
    Ok(BmsbEstimate::from_counts(hits, samples, P_PALEY_ZYGMUND))
}

/// Monte-Carlo second and fourth moments of `‖V ū‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    /// `‖V‖_F²`, the exact second moment.
    pub frobenius_sq: f64,
    pub second_moment: f64,
    pub second_std_error: f64,
    pub fourth_moment: f64,
    pub fourth_std_error: f64,
    /// `3‖V‖_F⁴`, the upper bound on the fourth moment.
    pub fourth_bound: f64,
    /// `|m̂_2 − ‖V‖_F²| ≤ 4·SE`.
    pub second_ok: bool,
    /// `m̂_4 ≤ 3‖V‖_F⁴ (1 + 4·SE/m̂_4)`.
    pub fourth_ok: bool,
    pub samples: usize,
}

pub fn moment_identities_check(big_v: &Matrix, samples: usize, seed: u64) -> Result<MomentReport> {
    if samples < 2 {
        return Err(Error::parameter("need at least two samples for a standard error"));
    }
    let frob = big_v.frobenius_norm();
    let frob_sq = frob * frob;
    if frob_sq == 0.0 {
        return Err(Error::parameter("V = 0 has no moments to check"));
    }
    let (mut ubar, mut y) = (vec![0.0; big_v.cols()], vec![0.0; big_v.rows()]);
    let (mut s2, mut s4, mut s8) = (0.0, 0.0, 0.0);
    for_each_draw(seed, Role::Trial, samples, |s| {
        s.fill_normal(&mut ubar);
        big_v.mul_slice_into(&ubar, &mut y);
        let r2 = dot(&y, &y);
        let r4 = r2 * r2;
        s2 += r2;
        s4 += r4;
        s8 += r4 * r4;
    });
    let count = samples as f64;
    let m2 = s2 / count;
    let m4 = s4 / count;
    let var2 = (s4 / count - m2 * m2).max(0.0) * count / (count - 1.0);
    let var4 = (s8 / count - m4 * m4).max(0.0) * count / (count - 1.0);
    let se2 = libm::sqrt(var2 / count);
    let se4 = libm::sqrt(var4 / count);
    let bound = 3.0 * frob_sq * frob_sq;
    Ok(MomentReport {
        frobenius_sq: frob_sq,
        second_moment: m2,
        second_std_error: se2,
        fourth_moment: m4,
        fourth_std_error: se4,
        fourth_bound: bound,
        second_ok: (m2 - frob_sq).abs() <= 4.0 * se2,
        fourth_ok: m4 <= bound * (1.0 + 4.0 * se4 / m4),
        samples,
    })
}

/// `P(⟨Vᵀ v_0, ū⟩ ≥ 0)`, which is `1/2` whenever `Vᵀ v_0 ≠ 0`.
/// Returns the estimate with threshold `1/2`; callers compare it two-sidedly.
pub fn sign_symmetry_check(v: &Vector, n: usize, samples: usize, seed: u64) -> Result<BmsbEstimate> {
    check_samples(samples)?;
    let (v0, big_v) = split_direction(v, n)?;
    let g = big_v.transpose().mul_slice(&v0);
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::parameter("V^T v_0 = 0, the sign event is degenerate"));
    }
    let mut ubar = vec![0.0; big_v.cols()];
    let mut hits = 0;
    for_each_draw(seed, Role::Filtration, samples, |s| {
        s.fill_normal(&mut ubar);
        if dot(&g, &ubar) >= 0.0 {
            hits += 1;
        }
    });
    Ok(BmsbEstimate::from_counts(hits, samples, 0.5))
}
