//! Adaptive Gauss-Kronrod (7/15) quadrature with optional endpoint-singularity
//! handling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TelemaxError};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
// Gauss weights attach to the odd Kronrod nodes (indices 1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv = [0.0; 15];
    fv[7] = f(center);
    for i in 0..7 {
        let dx = half * XGK[i];
        fv[i] = f(center - dx);
        fv[14 - i] = f(center + dx);
    }
    let mut k = fv[7] * WGK[7];
    let mut g = fv[7] * WG[3];
    for i in 0..7 {
        let pair = fv[i] + fv[14 - i];
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fv[7] - mean).abs();
    for i in 0..7 {
        asc += WGK[i] * ((fv[i] - mean).abs() + (fv[14 - i] - mean).abs());
    }
    let value = k * half;
    let resasc = asc * half.abs();
    let raw = ((k - g) * half).abs();
    // QUADPACK scaling of the Gauss/Kronrod difference.
    let mut error = raw;
    if resasc != 0.0 && raw != 0.0 {
        error = resasc * (200.0 * raw / resasc).powf(1.5).min(1.0);
    }
    error = error.max(50.0 * f64::EPSILON * value.abs());
    Segment { lo, hi, value, error }
}

/// Integrates `f` over `[lo, hi]` by bisecting the worst segment until the
/// summed error estimate meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if !(lo.is_finite() && hi.is_finite()) {
        return domain("integration limits must be finite");
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if hi < lo {
        let r = integrate(f, hi, lo, cfg)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, lo, hi);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if !value.is_finite() {
            return Err(TelemaxError::Quadrature {
                achieved: f64::INFINITY,
                requested: cfg.abs_tol,
            });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            return Err(TelemaxError::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Segment can no longer be split in floating point.
            return Err(TelemaxError::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let left = kronrod(&mut f, worst.lo, mid);
        let right = kronrod(&mut f, mid, worst.hi);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-add from the segments to shed accumulated update rounding.
    let intervals = heap.len();
    let (mut v, mut e) = (0.0, 0.0);
    for s in heap.iter() {
        v += s.value;
        e += s.error;
    }
    Ok(QuadResult {
        value: v,
        error: e,
        intervals,
    })
}

/// Integrates a function with possible integrable singularities at both ends.
///
/// The interval is split at its midpoint and each half is mapped with
/// `x = end ± w s^power`, which multiplies an `|x - end|^(a-1)` singularity by
/// `s^(power-1)` and leaves an integrand of order `s^(power a - 1)`.
///
/// `f` receives `(x, x - lo, hi - x)`; the two distances are computed without
/// cancellation, so integrands should use them instead of `x` near the ends.
pub fn integrate_singular_ends<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    power: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(power >= 1.0) {
        return domain(format!("substitution power must be >= 1, got {power}"));
    }
    if !(lo < hi) {
        return domain("integrate_singular_ends needs lo < hi");
    }
    let w = 0.5 * (hi - lo);
    let jac = |s: f64| power * s.powf(power - 1.0) * w;
    let half_cfg = QuadConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        ..*cfg
    };
    let left = integrate(
        |s| {
            let d = w * s.powf(power);
            f(lo + d, d, 2.0 * w - d) * jac(s)
        },
        0.0,
        1.0,
        &half_cfg,
    )?;
    let right = integrate(
        |s| {
            let d = w * s.powf(power);
            f(hi - d, 2.0 * w - d, d) * jac(s)
        },
        0.0,
        1.0,
        &half_cfg,
    )?;
    Ok(QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        intervals: left.intervals + right.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 1.0, -1.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (9.0 - 1.5 + 3.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(f64::exp, 0.0, 1.0, &QuadConfig::default()).unwrap();
        let b = integrate(f64::exp, 1.0, 0.0, &QuadConfig::default()).unwrap();
        assert_eq!(a.value, -b.value);
        assert!((a.value - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn kink_needs_refinement() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-12);
        assert!(r.intervals > 1);
    }

    #[test]
    fn inverse_sqrt_ends() {
        // ∫_0^1 (x(1-x))^(-1/2) dx = π
        let cfg = QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        };
        for power in [2.0, 3.0, 4.0, 6.0] {
            let r = integrate_singular_ends(|_, a: f64, b: f64| 1.0 / (a * b).sqrt(), 0.0, 1.0, power, &cfg).unwrap();
            assert!((r.value - std::f64::consts::PI).abs() < 1e-11, "{power}: {}", r.value);
        }
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg).unwrap_err();
        assert!(matches!(err, TelemaxError::Quadrature { .. }));
    }
}
