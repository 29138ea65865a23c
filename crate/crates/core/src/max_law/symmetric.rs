//! Closed forms available only when `c1 = c2 = c`.

use crate::error::{domain, Result};
use crate::special::{log_factorial, CompensatedSum};

fn check(c: f64, t: f64, beta: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite() && t > 0.0 && t.is_finite()) {
        return domain(format!("need c > 0 and t > 0, got c = {c}, t = {t}"));
    }
    if !(0.0..=c * t).contains(&beta) {
        return domain(format!("beta = {beta} outside [0, {}]", c * t));
    }
    Ok(())
}

/// `sum_k u^k P{max < beta | V(0) = c, N(t) = 2k+1}` in closed form:
/// `beta / ((1 - u) sqrt(c^2 t^2 - u (c^2 t^2 - beta^2)))`.
pub fn symmetric_cdf_generating_function(c: f64, t: f64, beta: f64, u: f64) -> Result<f64> {
    check(c, t, beta)?;
    if !(u.abs() < 1.0) {
        return domain(format!("generating function needs |u| < 1, got {u}"));
    }
    let ct2 = (c * t).powi(2);
    Ok(beta / ((1.0 - u) * (ct2 - u * (ct2 - beta * beta)).sqrt()))
}

/// `P{max < beta | V(0) = c, N(t) = 2k+1}` as
/// `(beta / ct) sum_{j<=k} C(2j, j) ((c^2t^2 - beta^2) / (4 c^2 t^2))^j`.
pub fn symmetric_cdf_plus_odd_central(c: f64, t: f64, beta: f64, k: u32) -> Result<f64> {
    check(c, t, beta)?;
    let ct = c * t;
    let s = (ct * ct - beta * beta) / (4.0 * ct * ct);
    // C(2j, j) / 4^j by its ratio recurrence, so k is not limited by binomial capacity.
    let mut sum = CompensatedSum::default();
    let mut term = 1.0;
    for j in 0..=k {
        if j > 0 {
            let jf = f64::from(j);
            term *= s * (2.0 * jf - 1.0) / (2.0 * jf) * 4.0;
        }
        sum.add(term);
    }
    Ok(beta / ct * sum.total())
}

/// Density kernel `2 (2k+1)!/k!^2 (c^2t^2 - x^2)^k / (2ct)^(2k+1)`: twice the
/// position density given `2k+1` reversals.
pub fn symmetric_max_kernel(c: f64, t: f64, x: f64, k: u32) -> Result<f64> {
    check(c, t, x.abs())?;
    let ct = c * t;
    let log_coef = std::f64::consts::LN_2 + log_factorial(2 * k + 1) - 2.0 * log_factorial(k);
    Ok(log_coef.exp() * (ct * ct - x * x).powi(k as i32) / (2.0 * ct).powi(2 * k as i32 + 1))
}

/// `2 int_0^beta (ct - x)^k (ct + x)^k dx` by repeated integration by parts:
/// `sum_j k!^2 / (j! (2k+1-j)!) [(ct-beta)^j (ct+beta)^(2k+1-j) - (ct-beta)^(2k+1-j) (ct+beta)^j]`.
pub fn symmetric_kernel_integral_by_parts(c: f64, t: f64, beta: f64, k: u32) -> Result<f64> {
    check(c, t, beta)?;
    let (lo, hi) = (c * t - beta, c * t + beta);
    let n = 2 * k + 1;
    let lf = 2.0 * log_factorial(k);
    let sum: CompensatedSum = (0..=k)
        .map(|j| {
            let w = (lf - log_factorial(j) - log_factorial(n - j)).exp();
            w * (lo.powi(j as i32) * hi.powi((n - j) as i32) - lo.powi((n - j) as i32) * hi.powi(j as i32))
        })
        .collect();
    Ok(sum.total())
}
