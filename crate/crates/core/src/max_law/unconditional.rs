//! Unconditional laws of the maximum as series of modified Bessel functions.
//!
//! Every Bessel term appears multiplied by a power of a ratio that blows up
//! at one edge of the support. Both are evaluated together through
//! `F(r; x, y) = sum_j x^j y^(j+r) / (j! (j+r)!)`, which equals
//! `I_r(2 sqrt(x y)) (y/x)^(r/2)` and stays finite when `x` or `y` is zero.

use crate::error::{Result, TelemaxError};
use crate::model::{check_beta, check_horizon, InitialVelocity, LawValue, MotionParams};
use crate::special::{log_factorial, weighted_bessel_series, SeriesConfig};

use super::conditional::{max_cdf_minus_count, max_cdf_plus_count};

/// `exp(-lambda t) weight^r F(r; x, y)` with `x + y = lambda t`.
fn fused_term(r: u32, x: f64, y: f64, weight: f64, cfg: &SeriesConfig, tol: f64) -> Result<LawValue> {
    let log_scale = -(x + y) + if r == 0 { 0.0 } else { f64::from(r) * weight.ln() };
    let s = weighted_bessel_series(r, x, y, log_scale, &SeriesConfig::new(tol, cfg.max_terms)?)?;
    Ok(LawValue::with_bound(s.value, s.tail_bound))
}

/// `sum_{r >= r0} exp(-lambda t) weight^r F(r; x, y)` with `x + y = lambda t`.
///
/// Uses `exp(-(x+y)) F(r; x, y) <= y^r / r!` to bound the omitted orders.
fn fused_sum(r0: u32, x: f64, y: f64, weight: f64, cfg: &SeriesConfig, tol: f64) -> Result<LawValue> {
    let z = weight * y;
    if z == 0.0 {
        return if r0 == 0 {
            fused_term(0, x, y, weight, cfg, 0.5 * tol)
        } else {
            Ok(LawValue::exact(0.0))
        };
    }
    let log_z = z.ln();
    let mut value = 0.0;
    let mut bound = 0.0;
    let mut r = r0;
    loop {
        let rf = f64::from(r);
        if rf + 1.0 > z {
            let log_tail = rf * log_z - log_factorial(r) - (1.0 - z / (rf + 1.0)).ln();
            let tail = log_tail.exp();
            if tail <= 0.5 * tol {
                return Ok(LawValue::with_bound(value, bound + tail));
            }
        }
        if (r - r0) as usize >= cfg.max_terms {
            return Err(TelemaxError::NonConvergence {
                what: "Bessel order series",
                terms: cfg.max_terms,
                tail_bound: f64::INFINITY,
            });
        }
        let term = fused_term(r, x, y, weight, cfg, 0.5 * tol / ((rf + 1.0) * (rf + 2.0)))?;
        value += term.value;
        bound += term.abs_error_bound;
        r += 1;
    }
}

struct Args {
    u: f64,
    v: f64,
    rho: f64,
}

fn args(p: &MotionParams, t: f64, beta: f64) -> Args {
    let mu = p.lambda() / (p.c1() + p.c2());
    Args {
        u: mu * (p.c1() * t - beta),
        v: mu * (p.c2() * t + beta),
        rho: p.c2() / p.c1(),
    }
}

fn combine(parts: &[(f64, LawValue)]) -> LawValue {
    parts.iter().fold(LawValue::exact(0.0), |acc, (w, l)| {
        LawValue::with_bound(
            acc.value + w * l.value,
            acc.abs_error_bound + w.abs() * l.abs_error_bound,
        )
    })
}

// Long Bessel series carry rounding of order 1e-13 near certainty.
fn clamp_probability(l: LawValue) -> LawValue {
    LawValue::with_bound(l.value.clamp(0.0, 1.0), l.abs_error_bound)
}

/// `P{max < beta | V(0) = +c1}`; excludes the atom `exp(-lambda t)` at `c1 t`.
pub fn max_cdf_plus_unconditional(p: &MotionParams, t: f64, beta: f64, cfg: &SeriesConfig) -> Result<LawValue> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let Args { u, v, rho } = args(p, t, beta);
    let tol = 0.5 * cfg.tail_tolerance;
    let up = fused_sum(1, u, v, 1.0, cfg, tol)?;
    let down = fused_sum(1, v, u, rho, cfg, tol)?;
    Ok(clamp_probability(combine(&[(1.0, up), (-1.0, down)])))
}

/// `P{max <= beta | V(0) = -c2}`; includes the atom at zero.
pub fn max_cdf_minus_unconditional(p: &MotionParams, t: f64, beta: f64, cfg: &SeriesConfig) -> Result<LawValue> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let Args { u, v, rho } = args(p, t, beta);
    let ratio = p.velocity_ratio();
    let tol = 0.5 * cfg.tail_tolerance;
    let up = fused_sum(0, u, v, 1.0, cfg, tol)?;
    let down = fused_sum(2, v, u, rho, cfg, tol / ratio)?;
    Ok(clamp_probability(combine(&[(1.0, up), (-ratio, down)])))
}

/// `P{max = 0 | V(0) = -c2}`. Depends on the speeds only through `c1 / c2`.
pub fn zero_mass_unconditional(p: &MotionParams, t: f64, cfg: &SeriesConfig) -> Result<LawValue> {
    check_horizon(t)?;
    let mu = p.lambda() / (p.c1() + p.c2());
    let (u, v) = (mu * p.c1() * t, mu * p.c2() * t);
    let skew = 1.0 - p.velocity_ratio();
    let tol = cfg.tail_tolerance / 3.0;
    let f0 = fused_term(0, u, v, 1.0, cfg, tol)?;
    let f1 = fused_term(1, u, v, 1.0, cfg, tol)?;
    let rest = fused_sum(2, u, v, 1.0, cfg, tol / skew.abs().max(1.0))?;
    Ok(clamp_probability(combine(&[(1.0, f0), (1.0, f1), (skew, rest)])))
}

/// `P{max <= beta | V(0) = -c2} - P{max < beta | V(0) = +c1}` from its own
/// Bessel expansion. Strictly positive when `c2 >= c1`.
pub fn minus_plus_cdf_gap(p: &MotionParams, t: f64, beta: f64, cfg: &SeriesConfig) -> Result<LawValue> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let Args { u, v, rho } = args(p, t, beta);
    let skew = 1.0 - p.velocity_ratio();
    let tol = cfg.tail_tolerance / 3.0;
    let f0 = fused_term(0, u, v, 1.0, cfg, tol)?;
    let f1 = fused_term(1, v, u, rho, cfg, tol)?;
    let rest = fused_sum(2, v, u, rho, cfg, tol / skew.abs().max(1.0))?;
    Ok(combine(&[(1.0, f0), (1.0, f1), (skew, rest)]))
}

/// Poisson weights `P{N(t) = n}` for `n = 0..=n_max` and a bound on the rest.
pub fn poisson_weights(lambda_t: f64, tail_tolerance: f64, n_cap: u32) -> Result<(Vec<f64>, f64)> {
    let mut w = Vec::new();
    let mut n = 0u32;
    loop {
        let log_pmf = if lambda_t == 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            f64::from(n) * lambda_t.ln() - lambda_t - log_factorial(n)
        };
        w.push(log_pmf.exp());
        let next = f64::from(n + 1);
        let tail = if lambda_t == 0.0 {
            0.0
        } else if next + 1.0 > lambda_t {
            (next * lambda_t.ln() - lambda_t - log_factorial(n + 1)).exp() / (1.0 - lambda_t / (next + 1.0))
        } else {
            f64::INFINITY
        };
        if tail <= tail_tolerance {
            return Ok((w, tail));
        }
        if n >= n_cap {
            return Err(TelemaxError::Capacity(format!(
                "Poisson mixture needs more than {n_cap} reversal counts at lambda t = {lambda_t}"
            )));
        }
        n += 1;
    }
}

/// The unconditional CDF as a Poisson mixture of the conditional laws,
/// truncated once the omitted Poisson mass is below `tail_tolerance`.
pub fn max_cdf_poisson_mixture(
    p: &MotionParams,
    t: f64,
    beta: f64,
    v0: InitialVelocity,
    tail_tolerance: f64,
) -> Result<LawValue> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let (w, tail) = poisson_weights(p.lambda() * t, tail_tolerance, crate::special::MAX_BINOMIAL_N)?;
    let mut acc = match v0 {
        InitialVelocity::Plus => 0.0,
        InitialVelocity::Minus => w[0],
    };
    for (n, wn) in w.iter().enumerate().skip(1) {
        let cond = match v0 {
            InitialVelocity::Plus => max_cdf_plus_count(p, t, beta, n as u32)?,
            InitialVelocity::Minus => max_cdf_minus_count(p, t, beta, n as u32)?,
        };
        acc += wn * cond.value;
    }
    Ok(LawValue::with_bound(acc, tail))
}
