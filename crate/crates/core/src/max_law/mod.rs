//! Distribution of the running maximum.

mod atoms;
mod conditional;
mod symmetric;
mod unconditional;

pub use atoms::{
    a_triangle, max_point_mass_plus, zero_mass_count, zero_mass_count_exact, zero_mass_odd_by_triangle,
    zero_mass_odd_split_form,
};
pub use conditional::{
    max_cdf_minus_count, max_cdf_minus_count_by_parity, max_cdf_plus_count, max_cdf_plus_count_by_parity,
    max_pdf_minus_count, max_pdf_plus_count, plus_cdf_summands,
};
pub use symmetric::{
    symmetric_cdf_generating_function, symmetric_cdf_plus_odd_central, symmetric_kernel_integral_by_parts,
    symmetric_max_kernel,
};
pub use unconditional::{
    max_cdf_minus_unconditional, max_cdf_plus_unconditional, max_cdf_poisson_mixture, minus_plus_cdf_gap,
    poisson_weights, zero_mass_unconditional,
};

use crate::error::{domain, Result};
use crate::model::{Conditioning, InitialVelocity, LawValue, MaxQuery, MotionParams};
use crate::special::SeriesConfig;

/// Evaluates the CDF selected by `q`: `P{max < beta}` for a positive start,
/// `P{max <= beta}` for a negative start.
pub fn max_cdf(p: &MotionParams, q: &MaxQuery, cfg: &SeriesConfig) -> Result<LawValue> {
    q.validate(p)?;
    match (q.v0, q.cond) {
        (InitialVelocity::Plus, Conditioning::GivenCount(n)) => max_cdf_plus_count(p, q.t, q.beta, n),
        (InitialVelocity::Minus, Conditioning::GivenCount(n)) => max_cdf_minus_count(p, q.t, q.beta, n),
        (InitialVelocity::Plus, Conditioning::Unconditional) => max_cdf_plus_unconditional(p, q.t, q.beta, cfg),
        (InitialVelocity::Minus, Conditioning::Unconditional) => max_cdf_minus_unconditional(p, q.t, q.beta, cfg),
    }
}

/// Density of the absolutely continuous part of the maximum given a count.
pub fn max_pdf(p: &MotionParams, q: &MaxQuery) -> Result<LawValue> {
    q.validate(p)?;
    match (q.v0, q.cond) {
        (InitialVelocity::Plus, Conditioning::GivenCount(n)) => max_pdf_plus_count(p, q.t, q.beta, n),
        (InitialVelocity::Minus, Conditioning::GivenCount(n)) => max_pdf_minus_count(p, q.t, q.beta, n),
        (_, Conditioning::Unconditional) => domain("densities are available only given the reversal count"),
    }
}
