//! Point masses of the maximum: the atom at zero for a negative start, the
//! atom at `c1 t` for a positive start, and the A-triangle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::conditional::check_capacity;
use crate::error::{domain, Result, TelemaxError};
use crate::model::{check_count, check_horizon, LawValue, MotionParams};
use crate::special::{binomial, binomial_f64, CompensatedSum};

fn split(p: &MotionParams) -> (f64, f64) {
    let s = p.c1() + p.c2();
    (p.c1() / s, p.c2() / s)
}

/// `P{max = 0 | V(0) = -c2, N(t) = n}`.
///
/// Depends on the speeds only through `c1 / c2`, and not on `t` or `lambda`.
pub fn zero_mass_count(p: &MotionParams, n: u32) -> Result<LawValue> {
    check_count(n)?;
    check_capacity(n)?;
    let (pr, q) = split(p);
    let sum: CompensatedSum = (0..=n / 2)
        .map(|j| {
            let j = i64::from(j);
            let w = binomial_f64(n, j) - binomial_f64(n, j - 1);
            w * pr.powi(j as i32) * q.powi(n as i32 - j as i32)
        })
        .collect();
    Ok(LawValue::exact(sum.total()))
}

/// The zero atom for `n = 2k + 1` written through the A-triangle:
/// `q^(k+1) sum_j A_j^(k) p^j` with `p = c1/(c1+c2)`, `q = c2/(c1+c2)`.
pub fn zero_mass_odd_by_triangle(p: &MotionParams, k: u32) -> Result<f64> {
    let row = a_triangle(k)?;
    let (pr, q) = split(p);
    let sum: CompensatedSum = row
        .iter()
        .enumerate()
        .map(|(j, &a)| a as f64 * pr.powi(j as i32))
        .collect();
    Ok(q.powi(k as i32 + 1) * sum.total())
}

/// The zero atom for `n = 2k + 1` as a leading binomial term plus a skewed
/// correction, before the coefficients are merged.
pub fn zero_mass_odd_split_form(p: &MotionParams, k: u32) -> Result<f64> {
    let n = 2 * k + 1;
    check_capacity(n)?;
    let (pr, q) = split(p);
    let lead = binomial_f64(n, i64::from(k)) * pr.powi(k as i32) * q.powi(k as i32 + 1);
    let tail: CompensatedSum = (0..k)
        .map(|j| binomial_f64(n, i64::from(j)) * pr.powi(j as i32) * q.powi((n - j) as i32))
        .collect();
    Ok(lead + (1.0 - p.velocity_ratio()) * tail.total())
}

/// Exact zero atom for rational speeds.
pub fn zero_mass_count_exact(c1: &BigRational, c2: &BigRational, n: u32) -> Result<BigRational> {
    check_count(n)?;
    check_capacity(n)?;
    if !(c1 > &BigRational::zero() && c2 > &BigRational::zero()) {
        return domain("speeds must be positive");
    }
    let s = c1 + c2;
    let pr = c1 / &s;
    let q = c2 / &s;
    let mut total = BigRational::zero();
    for j in 0..=n / 2 {
        let jj = i64::from(j);
        let w = BigInt::from(binomial(n, jj)?) - BigInt::from(binomial(n, jj - 1)?);
        total += BigRational::from_integer(w) * pow(&pr, j) * pow(&q, n - j);
    }
    Ok(total)
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Row `k` of the A-triangle: `A_0^(0) = 1`, `A_j^(k) = sum_{i<=j} A_i^(k-1)`
/// for `j < k`, and `A_k^(k) = A_{k-1}^(k)`. The diagonal is the Catalan sequence.
pub fn a_triangle(k: u32) -> Result<Vec<u128>> {
    let overflow = || TelemaxError::Capacity(format!("A-triangle row {k} exceeds 128-bit integers"));
    let mut row: Vec<u128> = vec![1];
    for kk in 1..=k as usize {
        let mut next = Vec::with_capacity(kk + 1);
        let mut acc: u128 = 0;
        for &a in &row {
            acc = acc.checked_add(a).ok_or_else(overflow)?;
            next.push(acc);
        }
        next.push(next[kk - 1]);
        row = next;
    }
    Ok(row)
}

/// `P{max = c1 t | V(0) = +c1} = exp(-lambda t)`: no reversal before `t`.
pub fn max_point_mass_plus(p: &MotionParams, t: f64) -> Result<LawValue> {
    check_horizon(t)?;
    Ok(LawValue::exact((-p.lambda() * t).exp()))
}
