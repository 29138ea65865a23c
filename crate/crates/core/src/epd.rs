//! Finite-difference residual checks for the generalized Euler-Poisson-Darboux
//! operators and the telegraph equation.
//!
//! Every operator has the form
//! `u_tt - c1 c2 u_xx + (c1 - c2) u_xt + (A/t + D) u_t + (B/t + E) u_x + (C/t^2) u`.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::MotionParams;
use crate::position::{nonhomogeneous_position_pdf, position_pdf};
use crate::special::SeriesConfig;

/// Which operator/solution pair to check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum EpdFamily {
    /// `(c1 t - x)^m (c2 t + x)^n`.
    G,
    /// `(c1 t - x)^m (c2 t + x)^n / t^(m+n+1)`.
    H,
    /// `(c1 t - x)^m (c2 t + x)^n / t^(m+n+r)`.
    K,
    /// The position density with constant rate `lambda`.
    TelegraphP,
    /// The position density with rate `alpha / t`.
    NonHom { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpdSpec {
    pub m: f64,
    pub n: f64,
    pub r: f64,
    pub family: EpdFamily,
}

impl EpdSpec {
    pub fn new(m: f64, n: f64, r: f64, family: EpdFamily) -> Result<Self> {
        if matches!(family, EpdFamily::G | EpdFamily::H | EpdFamily::K) && !(m > 0.0 && n > 0.0) {
            return domain(format!("exponents must be positive, got m = {m}, n = {n}"));
        }
        if let EpdFamily::NonHom { alpha } = family {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return domain(format!("alpha must be positive, got {alpha}"));
            }
        }
        if !r.is_finite() {
            return domain("r must be finite");
        }
        Ok(Self { m, n, r, family })
    }
}

/// Interior point, initial step, and number of halvings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub t0: f64,
    pub h: f64,
    pub levels: usize,
}

impl GridSpec {
    /// Checks that every stencil point at the coarsest level lies strictly
    /// inside `-c2 t < x < c1 t`, `t > 0`.
    pub fn validate(&self, p: &MotionParams) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return domain(format!("step must be positive, got {}", self.h));
        }
        if self.levels < 2 {
            return domain("at least two refinement levels are needed");
        }
        let t = self.t0 - self.h;
        if !(t > 0.0) {
            return domain("stencil reaches t <= 0");
        }
        if !(self.x0 - self.h > -p.c2() * t && self.x0 + self.h < p.c1() * t) {
            return domain(format!(
                "stencil around x = {} with step {} leaves the support",
                self.x0, self.h
            ));
        }
        Ok(())
    }
}

/// Coefficients of the lower-order terms: `A/t u_t + B/t u_x + C/t^2 u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpdCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

fn drift<T: Num + Clone>(m: &T, n: &T, c1: &T, c2: &T) -> T {
    c1.clone() * m.clone() - c2.clone() * n.clone()
}

/// Operator solved by `(c1 t - x)^m (c2 t + x)^n`.
pub fn g_coefficients<T: Num + Clone>(m: T, n: T, c1: T, c2: T) -> EpdCoefficients<T> {
    EpdCoefficients {
        a: T::zero() - (m.clone() + n.clone()),
        b: T::zero() - drift(&m, &n, &c1, &c2),
        c: T::zero(),
    }
}

/// Operator solved by `(c1 t - x)^m (c2 t + x)^n / t^(m+n+1)`.
pub fn h_coefficients<T: Num + Clone>(m: T, n: T, c1: T, c2: T) -> EpdCoefficients<T> {
    let two = T::one() + T::one();
    EpdCoefficients {
        a: m.clone() + n.clone() + two,
        b: (c1.clone() - c2.clone()) * (m.clone() + n.clone() + T::one()) - drift(&m, &n, &c1, &c2),
        c: T::zero(),
    }
}

/// Operator solved by `(c1 t - x)^m (c2 t + x)^n / t^(m+n+r)`.
pub fn k_coefficients<T: Num + Clone>(m: T, n: T, r: T, c1: T, c2: T) -> EpdCoefficients<T> {
    let two = T::one() + T::one();
    let s = m.clone() + n.clone() + r.clone();
    EpdCoefficients {
        a: m.clone() + n.clone() + two * r.clone(),
        b: (c1.clone() - c2.clone()) * s.clone() - drift(&m, &n, &c1, &c2),
        c: T::zero() - s * (T::one() - r),
    }
}

/// Operator of the telegraph equation with rate `alpha / t`.
pub fn nonhom_coefficients<T: Num + Clone>(alpha: T, c1: T, c2: T) -> EpdCoefficients<T> {
    let two = T::one() + T::one();
    EpdCoefficients {
        a: two * alpha.clone(),
        b: alpha * (c1 - c2),
        c: T::zero(),
    }
}

/// Full operator: `1/t`-weighted part plus constant first-order terms.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Operator {
    coef: EpdCoefficients<f64>,
    const_t: f64,
    const_x: f64,
}

fn operator(spec: &EpdSpec, p: &MotionParams) -> Operator {
    let (c1, c2) = (p.c1(), p.c2());
    let plain = |coef| Operator {
        coef,
        const_t: 0.0,
        const_x: 0.0,
    };
    match spec.family {
        EpdFamily::G => plain(g_coefficients(spec.m, spec.n, c1, c2)),
        EpdFamily::H => plain(h_coefficients(spec.m, spec.n, c1, c2)),
        EpdFamily::K => plain(k_coefficients(spec.m, spec.n, spec.r, c1, c2)),
        EpdFamily::NonHom { alpha } => plain(nonhom_coefficients(alpha, c1, c2)),
        EpdFamily::TelegraphP => Operator {
            coef: EpdCoefficients { a: 0.0, b: 0.0, c: 0.0 },
            const_t: 2.0 * p.lambda(),
            const_x: p.lambda() * (c1 - c2),
        },
    }
}

fn test_function(spec: &EpdSpec, p: &MotionParams, x: f64, t: f64) -> Result<f64> {
    let a = p.c1() * t - x;
    let b = p.c2() * t + x;
    let core = || a.powf(spec.m) * b.powf(spec.n);
    Ok(match spec.family {
        EpdFamily::G => core(),
        EpdFamily::H => core() / t.powf(spec.m + spec.n + 1.0),
        EpdFamily::K => core() / t.powf(spec.m + spec.n + spec.r),
        EpdFamily::TelegraphP => position_pdf(p, t, x, &SeriesConfig::default())?.value,
        EpdFamily::NonHom { alpha } => nonhomogeneous_position_pdf(p, alpha, t, x)?.value,
    })
}

/// Residual at one step size, with an estimate of the rounding floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelResidual {
    pub h: f64,
    pub residual: f64,
    pub floor: f64,
}

impl LevelResidual {
    /// Truncation error no longer dominates rounding.
    pub fn at_floor(&self) -> bool {
        self.residual <= FLOOR_MARGIN * self.floor
    }
}

const FLOOR_MARGIN: f64 = 10.0;
// Function values are trusted to a few ulps; stencils amplify that by 1/h^2.
const VALUE_NOISE: f64 = f64::EPSILON;

/// Residuals over successive halvings of the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelResidual>,
    /// `residual(h) / residual(h/2)` for consecutive levels.
    pub ratios: Vec<f64>,
}

impl ConvergenceReport {
    fn from_levels(levels: Vec<LevelResidual>) -> Self {
        let ratios = levels.windows(2).map(|w| w[0].residual / w[1].residual).collect();
        Self { levels, ratios }
    }

    /// Every pair of levels above the rounding floor shrinks by a factor in `[3.5, 4.5]`.
    pub fn is_second_order(&self) -> bool {
        self.levels
            .windows(2)
            .zip(&self.ratios)
            .filter(|(w, _)| !w[0].at_floor() && !w[1].at_floor())
            .all(|(_, r)| (3.5..=4.5).contains(r))
    }

    /// Largest residual among the levels.
    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.residual).fold(0.0, f64::max)
    }

    /// Residual at the finest level.
    pub fn finest(&self) -> LevelResidual {
        *self.levels.last().expect("at least two levels")
    }
}

/// Weighted stencil sum and the sum of absolute contributions.
#[derive(Default)]
struct Accum {
    sum: f64,
    scale: f64,
}

impl Accum {
    fn add(&mut self, w: f64, v: f64) {
        self.sum += w * v;
        self.scale += (w * v).abs();
    }
}

/// Applies the operator by central differences at one step size.
fn apply<F: Fn(f64, f64) -> Result<f64>>(
    u: &F,
    op: &Operator,
    c1: f64,
    c2: f64,
    x: f64,
    t: f64,
    h: f64,
) -> Result<LevelResidual> {
    let h2 = h * h;
    let u00 = u(x, t)?;
    let (upt, umt) = (u(x, t + h)?, u(x, t - h)?);
    let (upx, umx) = (u(x + h, t)?, u(x - h, t)?);
    let (upp, upm) = (u(x + h, t + h)?, u(x + h, t - h)?);
    let (ump, umm) = (u(x - h, t + h)?, u(x - h, t - h)?);
    let mut acc = Accum::default();
    // u_tt
    acc.add(1.0 / h2, upt);
    acc.add(-2.0 / h2, u00);
    acc.add(1.0 / h2, umt);
    // -c1 c2 u_xx
    let cxx = -c1 * c2 / h2;
    acc.add(cxx, upx);
    acc.add(-2.0 * cxx, u00);
    acc.add(cxx, umx);
    // (c1 - c2) u_xt, four-point cross
    let cxt = (c1 - c2) / (4.0 * h2);
    acc.add(cxt, upp);
    acc.add(-cxt, upm);
    acc.add(-cxt, ump);
    acc.add(cxt, umm);
    // first-order terms
    let ct = (op.coef.a / t + op.const_t) / (2.0 * h);
    acc.add(ct, upt);
    acc.add(-ct, umt);
    let cx = (op.coef.b / t + op.const_x) / (2.0 * h);
    acc.add(cx, upx);
    acc.add(-cx, umx);
    acc.add(op.coef.c / (t * t), u00);
    Ok(LevelResidual {
        h,
        residual: acc.sum.abs(),
        floor: VALUE_NOISE * acc.scale,
    })
}

fn steps(grid: &GridSpec) -> impl Iterator<Item = f64> + '_ {
    (0..grid.levels).map(move |l| grid.h / 2f64.powi(l as i32))
}

/// Residual of the selected operator applied to its closed-form solution,
/// at step sizes `h, h/2, h/4, ...`.
pub fn epd_residual(spec: &EpdSpec, p: &MotionParams, grid: &GridSpec) -> Result<ConvergenceReport> {
    grid.validate(p)?;
    let op = operator(spec, p);
    let u = |x: f64, t: f64| test_function(spec, p, x, t);
    let levels = steps(grid)
        .map(|h| apply(&u, &op, p.c1(), p.c2(), grid.x0, grid.t0, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_levels(levels))
}

/// A pair `(f, b)` of forward/backward densities solving the first-order system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum SystemSource {
    /// `(F, B) exp(kappa x + s t)` with constant rate `lambda`; `(F, B)` is an
    /// eigenvector of the system's symbol.
    PlaneWave { kappa: f64 },
    /// `f = a^(alpha-1) b^alpha / t^(2 alpha)`, `b = a^alpha b^(alpha-1) / t^(2 alpha)`
    /// with rate `alpha / t`.
    EpdRatePair { alpha: f64 },
}

/// Residuals of the first-order system and of the second-order equation
/// satisfied by `p = f + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualPair {
    pub system: ConvergenceReport,
    pub second_order: ConvergenceReport,
}

struct Pair {
    f: Box<dyn Fn(f64, f64) -> f64>,
    b: Box<dyn Fn(f64, f64) -> f64>,
    rate: Box<dyn Fn(f64) -> f64>,
    op: Operator,
}

fn build_pair(p: &MotionParams, source: SystemSource) -> Result<Pair> {
    let (c1, c2, lambda) = (p.c1(), p.c2(), p.lambda());
    match source {
        SystemSource::PlaneWave { kappa } => {
            if !kappa.is_finite() {
                return domain("kappa must be finite");
            }
            let m11 = -c1 * kappa - lambda;
            let m22 = c2 * kappa - lambda;
            let (s, fa, ba) = if lambda == 0.0 {
                (m11, 1.0, 0.0)
            } else {
                let mean = 0.5 * (m11 + m22);
                let s = mean + (0.25 * (m11 - m22).powi(2) + lambda * lambda).sqrt();
                (s, lambda, s - m11)
            };
            Ok(Pair {
                f: Box::new(move |x, t| fa * (kappa * x + s * t).exp()),
                b: Box::new(move |x, t| ba * (kappa * x + s * t).exp()),
                rate: Box::new(move |_| lambda),
                op: Operator {
                    coef: EpdCoefficients { a: 0.0, b: 0.0, c: 0.0 },
                    const_t: 2.0 * lambda,
                    const_x: lambda * (c1 - c2),
                },
            })
        }
        SystemSource::EpdRatePair { alpha } => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return domain(format!("alpha must be positive, got {alpha}"));
            }
            Ok(Pair {
                f: Box::new(move |x, t| {
                    (c1 * t - x).powf(alpha - 1.0) * (c2 * t + x).powf(alpha) / t.powf(2.0 * alpha)
                }),
                b: Box::new(move |x, t| {
                    (c1 * t - x).powf(alpha) * (c2 * t + x).powf(alpha - 1.0) / t.powf(2.0 * alpha)
                }),
                rate: Box::new(move |t| alpha / t),
                op: Operator {
                    coef: nonhom_coefficients(alpha, c1, c2),
                    const_t: 0.0,
                    const_x: 0.0,
                },
            })
        }
    }
}

fn system_level(pair: &Pair, c1: f64, c2: f64, x: f64, t: f64, h: f64) -> LevelResidual {
    let w = 1.0 / (2.0 * h);
    let lam = (pair.rate)(t);
    let (f, b) = (&pair.f, &pair.b);
    let (f0, b0) = (f(x, t), b(x, t));
    let mut first = Accum::default();
    first.add(w, f(x, t + h));
    first.add(-w, f(x, t - h));
    first.add(c1 * w, f(x + h, t));
    first.add(-c1 * w, f(x - h, t));
    first.add(lam, f0);
    first.add(-lam, b0);
    let mut second = Accum::default();
    second.add(w, b(x, t + h));
    second.add(-w, b(x, t - h));
    second.add(-c2 * w, b(x + h, t));
    second.add(c2 * w, b(x - h, t));
    second.add(-lam, f0);
    second.add(lam, b0);
    LevelResidual {
        h,
        residual: first.sum.abs().max(second.sum.abs()),
        floor: VALUE_NOISE * first.scale.max(second.scale),
    }
}

/// Checks a solution `(f, b)` of
/// `f_t + c1 f_x + lambda(t)(f - b) = 0`, `b_t - c2 b_x - lambda(t)(f - b) = 0`
/// and the second-order equation for `p = f + b`, both by central differences.
pub fn differential_system_residual(p: &MotionParams, grid: &GridSpec, source: SystemSource) -> Result<ResidualPair> {
    grid.validate(p)?;
    let pair = build_pair(p, source)?;
    let (c1, c2) = (p.c1(), p.c2());
    let system = steps(grid)
        .map(|h| system_level(&pair, c1, c2, grid.x0, grid.t0, h))
        .collect();
    let sum = |x: f64, t: f64| Ok((pair.f)(x, t) + (pair.b)(x, t));
    let second = steps(grid)
        .map(|h| apply(&sum, &pair.op, c1, c2, grid.x0, grid.t0, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualPair {
        system: ConvergenceReport::from_levels(system),
        second_order: ConvergenceReport::from_levels(second),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn grid(x0: f64, t0: f64, h: f64) -> GridSpec {
        GridSpec { x0, t0, h, levels: 4 }
    }

    #[test]
    fn h_family_study() {
        let p = MotionParams::new(2.0, 1.0, 0.0).unwrap();
        let spec = EpdSpec::new(2.0, 3.0, 0.0, EpdFamily::H).unwrap();
        let rep = epd_residual(
            &spec,
            &p,
            &GridSpec {
                x0: 0.3,
                t0: 1.0,
                h: 1e-2,
                levels: 5,
            },
        )
        .unwrap();
        assert!(rep.is_second_order(), "{rep:?}");
        let at_milli = rep.levels.iter().find(|l| (l.h - 1e-3).abs() < 1e-12);
        assert!(at_milli.is_none());
        let rep = epd_residual(
            &spec,
            &p,
            &GridSpec {
                x0: 0.3,
                t0: 1.0,
                h: 1e-3,
                levels: 2,
            },
        )
        .unwrap();
        // Truncation error at h = 1e-3 is about 7.4e-5 for this point.
        assert!(rep.levels[0].residual < 1e-4);
        assert!((rep.ratios[0] - 4.0).abs() < 0.05);
    }

    #[test]
    fn symmetric_g_family() {
        let p = MotionParams::symmetric(1.0, 0.0).unwrap();
        for m in [1.5, 2.0, 3.0] {
            let spec = EpdSpec::new(m, m, 0.0, EpdFamily::G).unwrap();
            let rep = epd_residual(&spec, &p, &grid(0.2, 1.0, 1e-3)).unwrap();
            if m < 3.0 {
                assert!(rep.finest().residual < 1e-6, "{m}: {rep:?}");
            }
            assert!(rep.is_second_order());
            let c = g_coefficients(m, m, 1.0, 1.0);
            assert_eq!((c.a, c.b, c.c), (-2.0 * m, 0.0, 0.0));
        }
    }

    #[test]
    fn k_identities_are_exact() {
        type Q = Ratio<i64>;
        let q = |n, d| Q::new(n, d);
        for &(m, n, c1, c2) in &[
            (q(2, 1), q(3, 1), q(2, 1), q(1, 1)),
            (q(7, 3), q(1, 2), q(5, 4), q(9, 7)),
        ] {
            assert_eq!(
                k_coefficients(m, n, Q::from_integer(1), c1, c2),
                h_coefficients(m, n, c1, c2)
            );
            assert_eq!(k_coefficients(m, n, -(m + n), c1, c2), g_coefficients(m, n, c1, c2));
        }
    }

    #[test]
    fn telegraph_density_satisfies_its_equation() {
        let p = MotionParams::new(2.0, 1.0, 1.5).unwrap();
        let spec = EpdSpec::new(1.0, 1.0, 0.0, EpdFamily::TelegraphP).unwrap();
        let rep = epd_residual(&spec, &p, &grid(0.3, 1.0, 1e-2)).unwrap();
        assert!(rep.is_second_order(), "{rep:?}");
        assert!(rep.finest().residual < 1e-5);
    }

    #[test]
    fn nonhomogeneous_density_satisfies_its_equation() {
        let p = MotionParams::new(2.0, 1.0, 0.0).unwrap();
        let spec = EpdSpec::new(1.0, 1.0, 0.0, EpdFamily::NonHom { alpha: 2.0 }).unwrap();
        let rep = epd_residual(&spec, &p, &grid(0.3, 1.0, 1e-3)).unwrap();
        assert!(rep.max_residual() < 1e-6, "{rep:?}");
        assert!(rep.is_second_order());
    }

    #[test]
    fn stencil_must_stay_inside() {
        let p = MotionParams::new(1.0, 1.0, 0.0).unwrap();
        let spec = EpdSpec::new(2.0, 2.0, 0.0, EpdFamily::G).unwrap();
        assert!(epd_residual(&spec, &p, &grid(0.95, 1.0, 0.1)).is_err());
        assert!(epd_residual(&spec, &p, &grid(0.0, 0.05, 0.1)).is_err());
        assert!(epd_residual(
            &spec,
            &p,
            &GridSpec {
                x0: 0.0,
                t0: 1.0,
                h: 0.1,
                levels: 1
            }
        )
        .is_err());
    }

    #[test]
    fn systems() {
        let p = MotionParams::new(2.0, 1.0, 0.7).unwrap();
        let rep =
            differential_system_residual(&p, &grid(0.2, 1.0, 1e-2), SystemSource::PlaneWave { kappa: 0.8 }).unwrap();
        assert!(
            rep.system.is_second_order() && rep.second_order.is_second_order(),
            "{rep:?}"
        );
        let rep =
            differential_system_residual(&p, &grid(0.2, 1.0, 1e-2), SystemSource::EpdRatePair { alpha: 2.0 }).unwrap();
        assert!(
            rep.system.is_second_order() && rep.second_order.is_second_order(),
            "{rep:?}"
        );
        assert!(rep.second_order.finest().residual < 1e-4, "{rep:?}");
    }

    #[test]
    fn symmetric_system_loses_mixed_and_drift_terms() {
        let c = nonhom_coefficients(2.0, 1.5, 1.5);
        assert_eq!(c.b, 0.0);
        let p = MotionParams::symmetric(1.5, 0.0).unwrap();
        let op = operator(&EpdSpec::new(1.0, 1.0, 0.0, EpdFamily::TelegraphP).unwrap(), &p);
        assert_eq!(op.const_x, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn k_family_converges(
            m in 0.5f64..4.0, n in 0.5f64..4.0, r in -3.0f64..3.0, c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, frac in 0.2f64..0.8
        ) {
            let p = MotionParams::new(c1, c2, 0.0).unwrap();
            let spec = EpdSpec::new(m, n, r, EpdFamily::K).unwrap();
            let x0 = -c2 + frac * (c1 + c2);
            let rep = epd_residual(&spec, &p, &grid(x0, 1.0, 1e-2)).unwrap();
            prop_assert!(rep.is_second_order(), "{:?}", rep);
        }
    }
}
