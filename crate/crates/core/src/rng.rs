//! Counter-based standard-normal streams.
//!
//! A stream is a 64-bit key plus a counter; the `i`-th uniform word is the
//! SplitMix64 finalizer applied to `key + (i + 1) * γ`. Keys for substreams
//! are derived by hashing the base seed together with a tuple such as
//! `(trial, time step, role)`, so every draw in a simulation is a pure
//! function of its coordinates and never of evaluation order.
//!
//! Normals come from the Box–Muller transform, consuming two uniforms per
//! pair of normals.

use core::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// What a substream is used for. Part of the substream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Role {
    Input = 1,
    Noise = 2,
    InitialState = 3,
    System = 4,
    Direction = 5,
    Filtration = 6,
    MonteCarlo = 7,
    Trial = 8,
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a base seed and a coordinate tuple into a substream key.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    let mut h = mix64(seed ^ 0x6a09_e667_f3bc_c909);
    for (i, &c) in coords.iter().enumerate() {
        let salt = (i as u64 + 1).wrapping_mul(GOLDEN_GAMMA);
        h = mix64(h ^ mix64(c.wrapping_add(salt)));
    }
    h
}

/// Deterministic stream of standard normal draws.
#[derive(Clone, Debug)]
pub struct GaussianStream {
    key: u64,
    counter: u64,
    spare: Option<f64>,
}

/// Standard-normal stream for `seed`.
pub fn gaussian_sampler(seed: u64) -> GaussianStream {
    GaussianStream::new(seed)
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: derive_seed(seed, &[]),
            counter: 0,
            spare: None,
        }
    }

    /// Independent substream identified by `coords` under `seed`.
    pub fn keyed(seed: u64, coords: &[u64]) -> Self {
        Self {
            key: derive_seed(seed, coords),
            counter: 0,
            spare: None,
        }
    }

    /// Substream for one `(trial, step, role)` cell.
    pub fn substream(seed: u64, trial: u64, step: u64, role: Role) -> Self {
        Self::keyed(seed, &[trial, step, role as u64])
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TAU * u2);
        self.spare = Some(r * s);
        r * c
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = self.next_normal());
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}
