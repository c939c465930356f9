//! Identification of discrete-time bilinear dynamical systems
//!
//! ```text
//! x_{t+1} = A_0 x_t + sum_k u_t[k] A_k x_t + w_{t+1}
//! ```
//!
//! from a single state/input trajectory by ordinary least squares, together
//! with the mean-square stability machinery (augmented second-moment matrix,
//! covariance propagation, admissible input strength), Monte-Carlo checks of
//! the small-ball anti-concentration property of the lifted state, and the
//! pure parts of the experiment harness (system generation, sweep planning,
//! rate fitting).
//!
//! The crate is `no_std` + `alloc`. File formats, the CLI and parallel sweep
//! execution live in the `bilinear-sysid-cli` companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bmsb;
pub mod error;
pub mod experiment;
pub mod identification;
pub mod linalg;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use model::{BilinearSystem, NoiseParams, StabilityProfile, Trajectory};
