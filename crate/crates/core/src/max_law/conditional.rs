//! Laws of the maximum conditional on the number of reversals.

use crate::error::{Result, TelemaxError};
use crate::model::{check_beta, check_count, check_horizon, LawValue, MotionParams};
use crate::special::{binomial_f64, CompensatedSum, MAX_BINOMIAL_N};

/// Normalized distances to the support edges at level `beta`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    /// `(c1 t - beta) / L`
    a: f64,
    /// `(c2 t + beta) / L`
    b: f64,
    /// `L = (c1 + c2) t`
    len: f64,
    /// `c2 / c1`
    rho: f64,
}

impl Frame {
    fn new(p: &MotionParams, t: f64, beta: f64) -> Self {
        let len = (p.c1() + p.c2()) * t;
        Self {
            a: (p.c1() * t - beta) / len,
            b: (p.c2() * t + beta) / len,
            len,
            rho: p.c2() / p.c1(),
        }
    }
}

pub(crate) fn check_capacity(n: u32) -> Result<()> {
    if n > MAX_BINOMIAL_N {
        return Err(TelemaxError::Capacity(format!(
            "conditional laws are supported for n <= {MAX_BINOMIAL_N}, got n = {n}"
        )));
    }
    Ok(())
}

fn check_all(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<Frame> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    check_count(n)?;
    check_capacity(n)?;
    Ok(Frame::new(p, t, beta))
}

fn pw(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

/// The `j`-th summands of `P{max < beta | V(0) = +c1, N(t) = n}`.
///
/// Each summand is written as `C(n,j) (AB)^j (X - Y) sum_i X^i Y^(m-1-i)` with
/// `X = B`, `Y = (c2/c1) A`, `m = n - 2j` and `X - Y = beta / (c1 t)`, so every
/// entry is a sum of nonnegative products.
pub fn plus_cdf_summands(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<Vec<f64>> {
    let f = check_all(p, t, beta, n)?;
    let x = f.b;
    let y = f.rho * f.a;
    let delta = beta / (p.c1() * t);
    let ab = f.a * f.b;
    let out = (0..=(n - 1) / 2)
        .map(|j| {
            let m = n - 2 * j;
            let geometric: CompensatedSum = (0..m).map(|i| pw(x, i) * pw(y, m - 1 - i)).collect();
            binomial_f64(n, i64::from(j)) * pw(ab, j) * delta * geometric.total()
        })
        .collect();
    Ok(out)
}

/// `P{max < beta | V(0) = +c1, N(t) = n}` for `beta` in `[0, c1 t]`.
///
/// Exact polynomial; does not depend on `lambda`.
pub fn max_cdf_plus_count(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<LawValue> {
    let total: CompensatedSum = plus_cdf_summands(p, t, beta, n)?.into_iter().collect();
    Ok(LawValue::exact(total.total().clamp(0.0, 1.0)))
}

/// `P{max <= beta | V(0) = -c2, N(t) = n}`, including the atom at zero.
pub fn max_cdf_minus_count(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<LawValue> {
    let f = check_all(p, t, beta, n)?;
    let half = n / 2;
    let mut sum = CompensatedSum::default();
    for j in 0..=half {
        sum.add(binomial_f64(n, i64::from(j)) * pw(f.a, j) * pw(f.b, n - j));
    }
    for j in 0..half {
        sum.add(-binomial_f64(n, i64::from(j)) * pw(f.rho, n - 1 - 2 * j) * pw(f.a, n - j) * pw(f.b, j));
    }
    Ok(LawValue::exact(sum.total().clamp(0.0, 1.0)))
}

/// Density of the maximum given `V(0) = +c1` and `N(t) = n` on `(0, c1 t)`.
///
/// The polynomial is evaluated on the closed interval, so the endpoints give
/// the one-sided limits.
pub fn max_pdf_plus_count(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<LawValue> {
    let f = check_all(p, t, beta, n)?;
    let (a, b, rho) = (f.a, f.b, f.rho);
    let skew = 1.0 - 1.0 / (rho * rho);
    let k = n / 2;
    let mut sum = CompensatedSum::default();
    if n.is_multiple_of(2) {
        let lead = f64::from(n) * binomial_f64(n - 1, i64::from(k));
        sum.add(lead * (pw(a, k - 1) * pw(b, k) + rho * rho * pw(a, k) * pw(b, k - 1)));
        for j in 0..k.saturating_sub(1) {
            sum.add(
                skew * f64::from(n)
                    * binomial_f64(n - 1, i64::from(j))
                    * pw(rho, n - 2 * j)
                    * pw(a, n - 1 - j)
                    * pw(b, j),
            );
        }
    } else {
        let lead = f64::from(n) * binomial_f64(n - 1, i64::from(k));
        sum.add((1.0 + rho) * lead * pw(a * b, k));
        for j in 0..k {
            sum.add(
                skew * f64::from(n)
                    * binomial_f64(n - 1, i64::from(j))
                    * pw(rho, n - 2 * j)
                    * pw(a, n - 1 - j)
                    * pw(b, j),
            );
        }
    }
    Ok(LawValue::exact((sum.total() / f.len).max(0.0)))
}

/// Density of the maximum given `V(0) = -c2` and `N(t) = n` on `(0, c1 t)`.
///
/// This is the absolutely continuous part only; it integrates to
/// `1 - zero_mass_count(n)`.
pub fn max_pdf_minus_count(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<LawValue> {
    let f = check_all(p, t, beta, n)?;
    let (a, b, rho) = (f.a, f.b, f.rho);
    let skew = 1.0 - 1.0 / (rho * rho);
    let k = n / 2;
    let nf = f64::from(n);
    let mut sum = CompensatedSum::default();
    if n.is_multiple_of(2) {
        sum.add((1.0 + rho) * nf * binomial_f64(n - 1, i64::from(k)) * pw(a, k) * pw(b, k - 1));
        for j in 0..k.saturating_sub(1) {
            sum.add(
                skew * nf * binomial_f64(n - 1, i64::from(j)) * pw(rho, n - 1 - 2 * j) * pw(a, n - 1 - j) * pw(b, j),
            );
        }
    } else {
        sum.add(nf * binomial_f64(n - 1, i64::from(k)) * pw(a * b, k));
        if k >= 1 {
            sum.add(rho * rho * nf * binomial_f64(n - 1, i64::from(k + 1)) * pw(a, k + 1) * pw(b, k - 1));
        }
        for j in 0..k.saturating_sub(1) {
            sum.add(
                skew * nf * binomial_f64(n - 1, i64::from(j)) * pw(rho, n - 1 - 2 * j) * pw(a, n - 1 - j) * pw(b, j),
            );
        }
    }
    Ok(LawValue::exact((sum.total() / f.len).max(0.0)))
}

/// The even/odd statements of the plus-start CDF, summed term by term in
/// unnormalized distances. Used to cross-check the unified evaluation.
pub fn max_cdf_plus_count_by_parity(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<f64> {
    check_all(p, t, beta, n)?;
    let a = p.c1() * t - beta;
    let b = p.c2() * t + beta;
    let len = (p.c1() + p.c2()) * t;
    let rho = p.c2() / p.c1();
    let k = n / 2;
    let upper = if n.is_multiple_of(2) { k - 1 } else { k };
    let mut acc = 0.0;
    for j in 0..=upper {
        let c = binomial_f64(n, i64::from(j));
        acc += c * (pw(a, j) * pw(b, n - j) - pw(rho, n - 2 * j) * pw(a, n - j) * pw(b, j));
    }
    Ok(acc / pw(len, n))
}

/// The even/odd statements of the minus-start CDF, summed term by term.
pub fn max_cdf_minus_count_by_parity(p: &MotionParams, t: f64, beta: f64, n: u32) -> Result<f64> {
    check_all(p, t, beta, n)?;
    let a = p.c1() * t - beta;
    let b = p.c2() * t + beta;
    let len = (p.c1() + p.c2()) * t;
    let rho = p.c2() / p.c1();
    let k = n / 2;
    let mut acc = 0.0;
    for j in 0..=k {
        acc += binomial_f64(n, i64::from(j)) * pw(a, j) * pw(b, n - j);
    }
    for j in 0..k {
        let e = if n.is_multiple_of(2) {
            2 * k - 1 - 2 * j
        } else {
            2 * k - 2 * j
        };
        acc -= binomial_f64(n, i64::from(j)) * pw(rho, e) * pw(a, n - j) * pw(b, j);
    }
    Ok(acc / pw(len, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(c1: f64, c2: f64) -> MotionParams {
        MotionParams::new(c1, c2, 1.0).unwrap()
    }

    #[test]
    fn single_reversal_is_uniform_in_first_epoch() {
        for &(c1, c2) in &[(1.0, 1.0), (2.0, 1.0), (0.3, 5.0)] {
            let p = params(c1, c2);
            let v = max_cdf_plus_count(&p, 1.0, 0.5 * c1, 1).unwrap();
            assert!((v.value - 0.5).abs() < 1e-15);
            assert_eq!(v.abs_error_bound, 0.0);
        }
    }

    #[test]
    fn two_reversals_hand_value() {
        let v = max_cdf_plus_count(&params(2.0, 1.0), 1.0, 1.0, 2).unwrap();
        assert!((v.value - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn three_reversal_closed_form() {
        let p = params(2.0, 1.0);
        for i in 0..=20 {
            let beta = 2.0 * f64::from(i) / 20.0;
            let expect = (beta / 2.0).powi(3) + 3.0 * beta * (2.0 - beta) * (1.0 + beta) / (3.0 * 4.0);
            let got = max_cdf_plus_count(&p, 1.0, beta, 3).unwrap().value;
            assert!((got - expect).abs() < 1e-14, "beta {beta}: {got} vs {expect}");
        }
    }

    #[test]
    fn endpoints() {
        let p = params(1.7, 0.4);
        for n in 1..=12 {
            assert_eq!(max_cdf_plus_count(&p, 2.0, 0.0, n).unwrap().value, 0.0);
            assert!((max_cdf_plus_count(&p, 2.0, 3.4, n).unwrap().value - 1.0).abs() < 1e-14);
            assert!((max_cdf_minus_count(&p, 2.0, 3.4, n).unwrap().value - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn minus_one_reversal_atom() {
        let v = max_cdf_minus_count(&params(2.0, 1.0), 1.0, 0.0, 1).unwrap();
        assert!((v.value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_spot_values() {
        let p = params(2.0, 1.0);
        let v = max_pdf_plus_count(&p, 1.0, 0.0, 3).unwrap().value;
        assert!((v - 0.5).abs() < 1e-15);
        let v = max_pdf_minus_count(&p, 1.0, 0.0, 3).unwrap().value;
        assert!((v - 5.0 / 9.0).abs() < 1e-15);
        let v = max_pdf_plus_count(&p, 1.0, 2.0 / 3.0, 3).unwrap().value;
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let sym = MotionParams::symmetric(1.0, 1.0).unwrap();
        assert!((max_pdf_plus_count(&sym, 1.0, 0.0, 2).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_matches_finite_difference() {
        let h = 1e-5;
        for &(c1, c2) in &[(2.0, 1.0), (1.0, 3.0), (1.0, 1.0)] {
            let p = params(c1, c2);
            let t = 1.3;
            for n in 1..=9 {
                for i in 1..=20 {
                    let beta = c1 * t * f64::from(i) / 21.0;
                    let fd_plus = (max_cdf_plus_count(&p, t, beta + h, n).unwrap().value
                        - max_cdf_plus_count(&p, t, beta - h, n).unwrap().value)
                        / (2.0 * h);
                    let fd_minus = (max_cdf_minus_count(&p, t, beta + h, n).unwrap().value
                        - max_cdf_minus_count(&p, t, beta - h, n).unwrap().value)
                        / (2.0 * h);
                    let plus = max_pdf_plus_count(&p, t, beta, n).unwrap().value;
                    let minus = max_pdf_minus_count(&p, t, beta, n).unwrap().value;
                    assert!((plus - fd_plus).abs() < 1e-6, "plus n={n} beta={beta}");
                    assert!((minus - fd_minus).abs() < 1e-6, "minus n={n} beta={beta}");
                }
            }
        }
    }

    #[test]
    fn rejects_outside_support_and_zero_count() {
        let p = params(1.0, 1.0);
        assert!(max_cdf_plus_count(&p, 1.0, 1.01, 2).is_err());
        assert!(max_cdf_plus_count(&p, 1.0, -0.01, 2).is_err());
        assert!(max_cdf_minus_count(&p, 1.0, 0.5, 0).is_err());
        assert!(matches!(
            max_cdf_plus_count(&p, 1.0, 0.5, 65),
            Err(TelemaxError::Capacity(_))
        ));
    }

    #[test]
    fn symmetric_parity_pairs_coincide() {
        let p = MotionParams::symmetric(1.5, 2.0).unwrap();
        for k in 1..=10 {
            for i in 0..=50 {
                let beta = 1.5 * 0.7 * f64::from(i) / 50.0;
                let odd = max_cdf_plus_count(&p, 0.7, beta, 2 * k - 1).unwrap().value;
                let even = max_cdf_plus_count(&p, 0.7, beta, 2 * k).unwrap().value;
                assert!((odd - even).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn unified_matches_parity_statements(
            c1 in 0.2f64..5.0, c2 in 0.2f64..5.0, t in 0.2f64..3.0, frac in 0.0f64..=1.0, n in 1u32..=20
        ) {
            let p = params(c1, c2);
            let beta = frac * c1 * t;
            let u = max_cdf_plus_count(&p, t, beta, n).unwrap().value;
            let w = max_cdf_plus_count_by_parity(&p, t, beta, n).unwrap();
            prop_assert!((u - w).abs() < 1e-12);
            let u = max_cdf_minus_count(&p, t, beta, n).unwrap().value;
            let w = max_cdf_minus_count_by_parity(&p, t, beta, n).unwrap();
            prop_assert!((u - w).abs() < 1e-12);
        }

        #[test]
        fn summands_are_nonnegative(
            c1 in 0.1f64..10.0, c2 in 0.1f64..10.0, t in 0.1f64..5.0, frac in 0.0f64..=1.0, n in 1u32..=40
        ) {
            let p = params(c1, c2);
            for s in plus_cdf_summands(&p, t, frac * c1 * t, n).unwrap() {
                prop_assert!(s >= 0.0);
            }
        }

        #[test]
        fn cdfs_are_monotone(c1 in 0.2f64..5.0, c2 in 0.2f64..5.0, n in 1u32..=16) {
            let p = params(c1, c2);
            let (mut prev_p, mut prev_m) = (0.0, 0.0);
            for i in 0..=1000 {
                let beta = (c1 * f64::from(i) / 1000.0).min(c1);
                let vp = max_cdf_plus_count(&p, 1.0, beta, n).unwrap().value;
                let vm = max_cdf_minus_count(&p, 1.0, beta, n).unwrap().value;
                prop_assert!(vp >= prev_p - 1e-14);
                prop_assert!(vm >= prev_m - 1e-14);
                prev_p = vp;
                prev_m = vm;
            }
        }

        #[test]
        fn lambda_does_not_enter(lambda in 0.0f64..50.0, frac in 0.0f64..=1.0, n in 1u32..=10) {
            let a = MotionParams::new(2.0, 0.5, lambda).unwrap();
            let b = MotionParams::new(2.0, 0.5, 0.0).unwrap();
            let beta = 2.0 * frac;
            prop_assert_eq!(max_cdf_plus_count(&a, 1.0, beta, n).unwrap(), max_cdf_plus_count(&b, 1.0, beta, n).unwrap());
        }
    }
}
