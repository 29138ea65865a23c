//! Position laws: the unconditional density with its two boundary atoms,
//! densities given the reversal count, and the fundamental solution for the
//! rate `lambda(t) = alpha / t`.

use crate::error::{domain, Result};
use crate::model::{check_count, check_horizon, InitialVelocity, LawValue, MotionParams};
use crate::special::{binomial_f64, log_gamma, weighted_bessel_series, SeriesConfig, MAX_BINOMIAL_N};

fn check_interior(p: &MotionParams, t: f64, x: f64) -> Result<()> {
    check_horizon(t)?;
    let (lo, hi) = p.support(t);
    if !(x > lo && x < hi) {
        return domain(format!("x = {x} outside the open support ({lo}, {hi})"));
    }
    Ok(())
}

fn check_closed(p: &MotionParams, t: f64, x: f64) -> Result<()> {
    check_horizon(t)?;
    let (lo, hi) = p.support(t);
    if !(lo..=hi).contains(&x) {
        return domain(format!("x = {x} outside the support [{lo}, {hi}]"));
    }
    Ok(())
}

/// Density of `T(t)` on the open support `(-c2 t, c1 t)`.
///
/// With `z = 2 mu sqrt(a b)`, `mu = lambda / (c1 + c2)`, `a = c1 t - x` and
/// `b = c2 t + x`, the derivative terms of `I_0` collapse to
/// `lambda e^{-lambda t} / (c1 + c2) [I_0(z) + (lambda t / 2) G(mu^2 a b)]`
/// where `G(w) = sum_j w^j / (j! (j+1)!)`.
pub fn position_pdf(p: &MotionParams, t: f64, x: f64, cfg: &SeriesConfig) -> Result<LawValue> {
    check_interior(p, t, x)?;
    let lambda = p.lambda();
    if lambda == 0.0 {
        return Ok(LawValue::exact(0.0));
    }
    let mu = lambda / (p.c1() + p.c2());
    let w = mu * mu * (p.c1() * t - x) * (p.c2() * t + x);
    let lt = lambda * t;
    let s = w.sqrt();
    let half = SeriesConfig::new(0.5 * cfg.tail_tolerance, cfg.max_terms)?;
    let i0 = weighted_bessel_series(0, s, s, -lt, &half)?;
    let g = weighted_bessel_series(1, w, 1.0, -lt, &half)?;
    let scale = lambda / (p.c1() + p.c2());
    Ok(LawValue::with_bound(
        scale * (i0.value + 0.5 * lt * g.value),
        scale * (i0.tail_bound + 0.5 * lt * g.tail_bound),
    ))
}

/// Masses at `x = -c2 t` and `x = c1 t`, each `exp(-lambda t) / 2`.
pub fn position_atoms(p: &MotionParams, t: f64) -> Result<(f64, f64)> {
    check_horizon(t)?;
    let m = 0.5 * (-p.lambda() * t).exp();
    Ok((m, m))
}

/// Density of `T(t)` given `N(t) = n` and, optionally, the initial velocity.
///
/// Odd counts do not depend on `v0`. For even counts `v0 = None` gives the
/// average over both starts, which equals the law for `n - 1` reversals.
pub fn position_pdf_given_count(
    p: &MotionParams,
    t: f64,
    x: f64,
    n: u32,
    v0: Option<InitialVelocity>,
) -> Result<LawValue> {
    check_closed(p, t, x)?;
    check_count(n)?;
    if n > MAX_BINOMIAL_N {
        return Err(crate::error::TelemaxError::Capacity(format!(
            "conditional position laws are supported for n <= {MAX_BINOMIAL_N}"
        )));
    }
    let len = (p.c1() + p.c2()) * t;
    let a = (p.c1() * t - x) / len;
    let b = (p.c2() * t + x) / len;
    let k = n / 2;
    let kernel = |m: u32, ea: u32, eb: u32| {
        f64::from(m) * binomial_f64(m - 1, i64::from(m / 2)) * a.powi(ea as i32) * b.powi(eb as i32) / len
    };
    let value = match (n % 2, v0) {
        (1, _) => kernel(n, k, k),
        (_, None) => kernel(n - 1, k - 1, k - 1),
        (_, Some(InitialVelocity::Plus)) => kernel(n, k - 1, k),
        (_, Some(InitialVelocity::Minus)) => kernel(n, k, k - 1),
    };
    Ok(LawValue::exact(value))
}

/// Density of the position when reversals occur at rate `alpha / t`:
/// a Beta(`alpha`, `alpha`) law stretched over `(-c2 t, c1 t)`.
pub fn nonhomogeneous_position_pdf(p: &MotionParams, alpha: f64, t: f64, x: f64) -> Result<LawValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    check_interior(p, t, x)?;
    nonhomogeneous_pdf_from_gaps(p, alpha, t, p.c2() * t + x, p.c1() * t - x)
}

/// The same density parametrized by the distances `x + c2 t` and `c1 t - x`
/// to the two ends, which keeps full relative precision near either end.
pub fn nonhomogeneous_pdf_from_gaps(p: &MotionParams, alpha: f64, t: f64, left: f64, right: f64) -> Result<LawValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    check_horizon(t)?;
    if !(left > 0.0 && right > 0.0) {
        return domain("distances to the support ends must be positive");
    }
    let len = (p.c1() + p.c2()) * t;
    let log_norm = log_gamma(2.0 * alpha)? - 2.0 * log_gamma(alpha)?;
    let log_kernel = (alpha - 1.0) * ((left / len).ln() + (right / len).ln());
    Ok(LawValue::exact((log_norm + log_kernel).exp() / len))
}
