//! Running-maximum laws of the asymmetric telegraph process.
//!
//! A particle moves right at speed `c1` and left at speed `c2`, reversing at
//! the events of a Poisson process with rate `lambda`. This crate evaluates
//! the distribution of `max_{0<=s<=t} T(s)` in closed form, the position laws,
//! Euler-Poisson-Darboux residual checks, a Monte Carlo path simulator, and
//! the oracles that tie them together.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod epd;
pub mod error;
pub mod max_law;
pub mod model;
pub mod position;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod validation;

pub use error::{Result, TelemaxError};
pub use model::{Conditioning, InitialVelocity, LawValue, MaxQuery, MotionParams};
pub use special::SeriesConfig;
