//! Exact binomials, modified Bessel series and `ln Γ`.
//!
//! Every series here is summed term by term from an explicit factorial
//! denominator and stops only once a rigorous bound on the remaining tail is
//! below the requested tolerance. Running out of terms is an error, never a
//! silently truncated partial sum.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TelemaxError};

/// Largest `n` for which [`binomial`] is supported.
pub const MAX_BINOMIAL_N: u32 = 64;

/// Truncation policy for infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Absolute bound the discarded tail must satisfy.
    pub tail_tolerance: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl SeriesConfig {
    pub fn new(tail_tolerance: f64, max_terms: usize) -> Result<Self> {
        if !(tail_tolerance > 0.0 && tail_tolerance.is_finite()) {
            return domain(format!("tail tolerance must be positive, got {tail_tolerance}"));
        }
        if max_terms == 0 {
            return domain("max_terms must be at least 1");
        }
        Ok(Self {
            tail_tolerance,
            max_terms,
        })
    }
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-15,
            max_terms: 1000,
        }
    }
}

/// Partial sum of a series with a certified bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Exact `C(n, j)`, zero when `j < 0` or `j > n`.
pub fn binomial(n: u32, j: i64) -> Result<u128> {
    if n > MAX_BINOMIAL_N {
        return Err(TelemaxError::Capacity(format!(
            "binomial coefficients are exact only for n <= {MAX_BINOMIAL_N}, got n = {n}"
        )));
    }
    if j < 0 || j > i64::from(n) {
        return Ok(0);
    }
    let n = u128::from(n);
    let k = (j as u128).min(n - j as u128);
    // C(n, i) * (n - i) is divisible by (i + 1); the product stays below 2^71.
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    Ok(c)
}

/// `C(n, j)` as `f64`, for callers that already checked `n <= 64`.
pub(crate) fn binomial_f64(n: u32, j: i64) -> f64 {
    binomial(n, j).expect("binomial capacity checked by caller") as f64
}

/// Modified Bessel function of the first kind `I_r(x)` for integer order.
///
/// `x >= 0`. The returned `tail_bound` bounds the omitted part of the power series.
pub fn bessel_i(order: u32, x: f64, cfg: &SeriesConfig) -> Result<SeriesValue> {
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("bessel_i needs a finite x >= 0, got {x}"));
    }
    let half = 0.5 * x;
    weighted_bessel_series(order, half, half, 0.0, cfg)
}

/// `exp(log_scale) * sum_j u^j v^(j+r) / (j! (j+r)!)`.
///
/// This equals `exp(log_scale) I_r(2 sqrt(u v)) (v/u)^(r/2)`: the Bessel term
/// with the ratio power folded into the series, so it stays finite when either
/// `u` or `v` vanishes.
pub fn weighted_bessel_series(order: u32, u: f64, v: f64, log_scale: f64, cfg: &SeriesConfig) -> Result<SeriesValue> {
    if !(u >= 0.0 && v >= 0.0) {
        return domain(format!("weighted Bessel series needs u, v >= 0, got {u}, {v}"));
    }
    let log_pow_v = if order == 0 { 0.0 } else { f64::from(order) * v.ln() };
    let log_first = log_scale + log_pow_v - log_factorial(order);
    sum_ratio_series(order, u * v, log_first, cfg, "modified Bessel series")
}

/// Sums `exp(log_first) * sum_j w^j r! / (j! (j+r)!)` from the term recurrence.
///
/// The term ratio `w / ((j+1)(j+r+1))` decreases in `j`, so once it is below
/// one half the tail after term `j` is at most `term_j * q / (1 - q)`.
/// Terms are carried relative to `exp(log_first)` and rescaled on overflow,
/// so a first term that underflows on its own does not zero the sum.
fn sum_ratio_series(order: u32, w: f64, log_first: f64, cfg: &SeriesConfig, what: &'static str) -> Result<SeriesValue> {
    if log_first == f64::NEG_INFINITY {
        return Ok(SeriesValue {
            value: 0.0,
            tail_bound: 0.0,
            terms: 1,
        });
    }
    const RESCALE: f64 = 1e280;
    let r = f64::from(order);
    let mut log_offset = log_first;
    let mut sum = CompensatedSum::default();
    let mut term = 1.0;
    let mut tail = f64::INFINITY;
    for j in 0..cfg.max_terms {
        sum.add(term);
        let jf = j as f64;
        let q = w / ((jf + 1.0) * (jf + r + 1.0));
        if q < 0.5 {
            tail = term * q / (1.0 - q) * log_offset.exp();
            if tail <= cfg.tail_tolerance {
                return Ok(SeriesValue {
                    value: sum.total() * log_offset.exp(),
                    tail_bound: tail,
                    terms: j + 1,
                });
            }
        }
        term *= q;
        if term > RESCALE {
            let total = sum.total() / RESCALE;
            sum = CompensatedSum::default();
            sum.add(total);
            term /= RESCALE;
            log_offset += RESCALE.ln();
        }
    }
    Err(TelemaxError::NonConvergence {
        what,
        terms: cfg.max_terms,
        tail_bound: tail,
    })
}

/// `ln(n!)`, exact summation for small `n`.
pub(crate) fn log_factorial(n: u32) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 30 {
        (2..=n).map(|i| f64::from(i).ln()).sum()
    } else {
        log_gamma(f64::from(n) + 1.0).expect("positive argument")
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("log_gamma needs a finite x > 0, got {x}"));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x < 0.5 {
        // ln Γ(x) = ln Γ(x + 1) - ln x keeps the Lanczos sum in its accurate range.
        return Ok(log_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let tt = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * tt.ln() - tt + acc.ln())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SeriesConfig {
        SeriesConfig::default()
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(4, 2).unwrap(), 6);
        assert_eq!(binomial(2, -1).unwrap(), 0);
        assert_eq!(binomial(2, 3).unwrap(), 0);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
    }

    #[test]
    fn binomial_matches_product_formula() {
        // prod_{i=1..k} (n - k + i) / i, accumulated as an exact rational
        let (n, k) = (52u128, 26u128);
        let (mut num, mut den) = (1u128, 1u128);
        for i in 1..=k {
            num *= n - k + i;
            den *= i;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        assert_eq!(den, 1);
        assert_eq!(binomial(52, 26).unwrap(), num);
        assert_eq!(num, 495_918_532_948_104);
    }

    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    #[test]
    fn binomial_capacity() {
        assert!(matches!(binomial(65, 3), Err(TelemaxError::Capacity(_))));
    }

    #[test]
    fn rows_sum_to_powers_of_two() {
        for n in 0..=64u32 {
            let total: u128 = (0..=i64::from(n)).map(|j| binomial(n, j).unwrap()).sum();
            assert_eq!(total, 1u128 << n, "row {n}");
        }
    }

    #[test]
    fn bessel_at_zero() {
        let v = bessel_i(0, 0.0, &cfg()).unwrap();
        assert_eq!(v.value, 1.0);
        for r in 1..6 {
            assert_eq!(bessel_i(r, 0.0, &cfg()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn bessel_i0_of_one() {
        // Brute force: 200 terms, no early exit, summed in reverse order.
        let brute: f64 = (0..200)
            .rev()
            .map(|j| {
                let mut t = 1.0f64;
                for i in 1..=j {
                    t *= 0.25 / (i as f64 * i as f64);
                }
                t
            })
            .sum();
        let v = bessel_i(0, 1.0, &cfg()).unwrap();
        assert!((v.value - brute).abs() < 1e-15);
        assert!((v.value - 1.266_065_877_752_008_3).abs() < 1e-15);
        assert!(v.tail_bound <= 1e-15);
        assert!(v.terms <= 20);
    }

    #[test]
    fn bessel_reference_values() {
        let v = bessel_i(3, 2.5, &cfg()).unwrap().value;
        assert!((v - 0.474_370_408_778_035_6).abs() < 1e-15);
        let v = bessel_i(1, 20.0, &cfg()).unwrap().value;
        assert!(((v - 42_454_973.385_127_77) / v).abs() < 1e-14);
    }

    #[test]
    fn bessel_recurrence() {
        for xi in 0..40 {
            let x = 0.1 + xi as f64 * (19.9 / 39.0);
            for r in 1..=10u32 {
                let lo = bessel_i(r - 1, x, &cfg()).unwrap().value;
                let mid = bessel_i(r, x, &cfg()).unwrap().value;
                let hi = bessel_i(r + 1, x, &cfg()).unwrap().value;
                let lhs = lo - hi;
                let rhs = 2.0 * f64::from(r) / x * mid;
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                    "x={x} r={r}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn generating_function_identity() {
        for &x in &[0.5, 2.0, 7.0] {
            let mut s = bessel_i(0, x, &cfg()).unwrap().value;
            for r in 1..=80 {
                s += 2.0 * bessel_i(r, x, &cfg()).unwrap().value;
            }
            assert!(((-x).exp() * s - 1.0).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn bessel_nonconvergence_is_reported() {
        let tight = SeriesConfig::new(1e-15, 3).unwrap();
        let err = bessel_i(0, 30.0, &tight).unwrap_err();
        assert!(matches!(err, TelemaxError::NonConvergence { terms: 3, .. }));
        assert!(bessel_i(0, -1.0, &cfg()).is_err());
    }

    #[test]
    fn weighted_series_handles_vanishing_arguments() {
        // u = 0: only the j = 0 term v^r / r! survives
        let v = weighted_bessel_series(3, 0.0, 2.0, 0.0, &cfg()).unwrap();
        assert!((v.value - 8.0 / 6.0).abs() < 1e-15);
        // v = 0 kills every term with r >= 1
        let v = weighted_bessel_series(2, 1.5, 0.0, 0.0, &cfg()).unwrap();
        assert_eq!(v.value, 0.0);
        let v = weighted_bessel_series(0, 0.0, 0.0, 0.0, &cfg()).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn scaled_series_survives_underflowing_prefactor() {
        // exp(-x) I_0(x) at x = 800 is about 1 / sqrt(2 pi x) even though exp(-800) underflows.
        let x = 800.0;
        let v = weighted_bessel_series(0, x / 2.0, x / 2.0, -x, &cfg()).unwrap();
        let asymptotic = 1.0 / (2.0 * std::f64::consts::PI * x).sqrt() * (1.0 + 1.0 / (8.0 * x));
        assert!((v.value - asymptotic).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        let half = log_gamma(0.5).unwrap();
        assert!((half - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.0).is_err());
    }

    #[test]
    fn log_gamma_matches_recursion() {
        // Γ(x + 1) = x Γ(x), anchored at Γ(1.3) = 0.8974706963062772...
        let anchor = 0.897_470_696_306_277_2_f64.ln();
        let mut x: f64 = 1.3;
        let mut expected = anchor;
        while x < 7.25 {
            expected += x.ln();
            x += 1.0;
        }
        let got = log_gamma(7.3).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-12);
        assert!((got - 7.147892523022248).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_relative_accuracy() {
        // ln Γ(n) = ln((n-1)!) exactly summable for integers; half-integers from Γ(1/2).
        for n in 3..=100u32 {
            let exact: f64 = (1..n).map(|i| f64::from(i).ln()).sum();
            let got = log_gamma(f64::from(n)).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-12, "n={n}");
        }
        let mut exact = std::f64::consts::PI.sqrt().ln();
        let mut x: f64 = 0.5;
        while x < 99.0 {
            exact += x.ln();
            x += 1.0;
            if (x - 1.5).abs() > 0.1 {
                let got = log_gamma(x).unwrap();
                assert!(((got - exact) / exact).abs() < 1e-12, "x={x}");
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e-16, 1e-16, -1.0].into_iter().collect();
        assert!((s.total() - 2e-16).abs() < 1e-30);
    }
}
