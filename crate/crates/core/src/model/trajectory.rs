use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{lift_slices, BilinearSystem, NoiseParams};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{GaussianStream, Role};

/// A single recorded trajectory `x_0..x_{T+1}`, `u_0..u_T` and, for
/// simulated data, the noise `w_1..w_{T+1}` that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<Vector>,
    inputs: Vec<Vector>,
    noises: Option<Vec<Vector>>,
    seed: u64,
    params: NoiseParams,
}

/// Stacked lifted states and next states, one row per `t = 1..=T`.
#[derive(Clone, Debug)]
pub struct RegressionBlocks {
    /// `T × n(m+1)`, row `t − 1` is `x̃_tᵀ`.
    pub design: Matrix,
    /// `T × n`, row `t − 1` is `x_{t+1}ᵀ`.
    pub targets: Matrix,
}

impl Trajectory {
    /// `states.len()` must be `inputs.len() + 1`, and `noises` (when given)
    /// has one entry per input.
    pub fn new(
        states: Vec<Vector>,
        inputs: Vec<Vector>,
        noises: Option<Vec<Vector>>,
        seed: u64,
        params: NoiseParams,
    ) -> Result<Self> {
        if inputs.is_empty() || states.len() != inputs.len() + 1 {
            return Err(Error::dimension(
                "Trajectory::new",
                format!("{} states for {} inputs", states.len(), inputs.len()),
            ));
        }
        let n = states[0].dim();
        let m = inputs[0].dim();
        if states.iter().any(|x| x.dim() != n) || inputs.iter().any(|u| u.dim() != m) {
            return Err(Error::dimension("Trajectory::new", "ragged states or inputs"));
        }
        if let Some(w) = &noises {
            if w.len() != inputs.len() || w.iter().any(|w| w.dim() != n) {
                return Err(Error::dimension(
                    "Trajectory::new",
                    format!("{} noise vectors for {} inputs", w.len(), inputs.len()),
                ));
            }
        }
        Ok(Self {
            states,
            inputs,
            noises,
            seed,
            params,
        })
    }

    /// `T`: the last input index; states run to `x_{T+1}`.
    #[inline]
    pub fn horizon(&self) -> usize {
        self.inputs.len() - 1
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.states[0].dim()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.inputs[0].dim()
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    /// `noises()[i]` is `w_{i+1}`.
    pub fn noises(&self) -> Option<&[Vector]> {
        self.noises.as_deref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> NoiseParams {
        self.params
    }

    /// `‖x_t‖` for `t = 0..=T+1`.
    pub fn state_norms(&self) -> Vec<f64> {
        self.states.iter().map(Vector::norm).collect()
    }

    pub fn max_state_norm(&self) -> f64 {
        self.states.iter().map(Vector::norm).fold(0.0, f64::max)
    }

    /// Re-run every recorded transition through `sys` with the recorded
    /// inputs and noises. `Some(true)` iff every state is reproduced exactly.
    pub fn replays_exactly(&self, sys: &BilinearSystem) -> Option<bool> {
        let noises = self.noises.as_ref()?;
        if sys.n() != self.n() || sys.m() != self.m() {
            return Some(false);
        }
        let mut out = vec![0.0; sys.n()];
        let mut scratch = vec![0.0; sys.n()];
        Some((0..self.inputs.len()).all(|t| {
            sys.step_into(
                self.states[t].as_slice(),
                self.inputs[t].as_slice(),
                noises[t].as_slice(),
                &mut out,
                &mut scratch,
            );
            out == self.states[t + 1].as_slice()
        }))
    }

    /// `X̃_T` and `Y_T` for the rows `t = 1..=T`.
    pub fn regression_blocks(&self) -> Result<RegressionBlocks> {
        let horizon = self.horizon();
        if horizon < 1 {
            return Err(Error::parameter("regression needs a trajectory with T >= 1"));
        }
        let sigma_u = self.params.sigma_u();
        let lifted: Vec<Vec<f64>> = (1..=horizon)
            .map(|t| lift_slices(self.states[t].as_slice(), self.inputs[t].as_slice(), sigma_u))
            .collect();
        let d = lifted[0].len();
        let design = Matrix::from_fn(horizon, d, |r, c| lifted[r][c]);
        let targets = Matrix::from_fn(horizon, self.n(), |r, c| self.states[r + 2][c]);
        Ok(RegressionBlocks { design, targets })
    }

    /// `W_T`: row `t − 1` is `w_{t+1}ᵀ`, when noises were recorded.
    pub fn noise_block(&self) -> Option<Matrix> {
        let noises = self.noises.as_ref()?;
        let horizon = self.horizon();
        (horizon >= 1).then(|| Matrix::from_fn(horizon, self.n(), |r, c| noises[r + 1][c]))
    }
}

/// Simulate `x_0 → x_{T+1}` with `u_t ~ N(0, σ_u² I)` and `w_{t+1} ~ N(0, σ_w² I)`.
///
/// Draws for step `t` come from the substreams keyed `(t, Input)` and
/// `(t + 1, Noise)` under `seed`, so a prefix of a longer run is identical
/// to a shorter run with the same seed.
pub fn simulate(
    sys: &BilinearSystem,
    noise: NoiseParams,
    x0: &Vector,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    if horizon < 1 {
        return Err(Error::parameter("simulate needs T >= 1"));
    }
    let (n, m) = (sys.n(), sys.m());
    if x0.dim() != n {
        return Err(Error::dimension(
            "simulate",
            format!("x0 has dim {}, expected {n}", x0.dim()),
        ));
    }

    let mut states = Vec::with_capacity(horizon + 2);
    let mut inputs = Vec::with_capacity(horizon + 1);
    let mut noises = Vec::with_capacity(horizon + 1);
    let mut scratch = vec![0.0; n];
    states.push(x0.clone());

    for t in 0..=horizon {
        let mut u = vec![0.0; m];
        let mut input_stream = GaussianStream::keyed(seed, &[t as u64, Role::Input as u64]);
        u.iter_mut()
            .for_each(|x| *x = noise.sigma_u() * input_stream.next_normal());

        let mut w = vec![0.0; n];
        let mut noise_stream = GaussianStream::keyed(seed, &[t as u64 + 1, Role::Noise as u64]);
        w.iter_mut()
            .for_each(|x| *x = noise.sigma_w() * noise_stream.next_normal());

        let mut next = vec![0.0; n];
        sys.step_into(states[t].as_slice(), &u, &w, &mut next, &mut scratch);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::parameter(format!(
                "state diverged to a non-finite value at t = {}",
                t + 1
            )));
        }
        states.push(Vector::from_vec_unchecked(next));
        inputs.push(Vector::from_vec_unchecked(u));
        noises.push(Vector::from_vec_unchecked(w));
    }

    Trajectory::new(states, inputs, Some(noises), seed, noise)
}

/// [`simulate`] from `x_0 ~ N(0, I_n)`, drawn from the `(0, InitialState)`
/// substream of `seed`.
pub fn simulate_standard_start(
    sys: &BilinearSystem,
    noise: NoiseParams,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut stream = GaussianStream::keyed(seed, &[0, Role::InitialState as u64]);
    let x0: Vec<f64> = (0..sys.n()).map(|_| stream.next_normal()).collect();
    simulate(sys, noise, &Vector::from_vec_unchecked(x0), horizon, seed)
}
