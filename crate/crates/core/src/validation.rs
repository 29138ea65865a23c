//! Independent oracles for the closed forms: iterated quadrature of the
//! path-constraint integral, Poisson mixtures of conditional laws,
//! Monte Carlo comparisons, and the named suites behind `telemax validate`.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::epd::{
    epd_residual, g_coefficients, h_coefficients, k_coefficients, ConvergenceReport, EpdFamily, EpdSpec, GridSpec,
};
use crate::error::{domain, Result, TelemaxError};
use crate::max_law::{
    a_triangle, max_cdf_minus_count, max_cdf_minus_unconditional, max_cdf_plus_count, max_cdf_plus_unconditional,
    max_cdf_poisson_mixture, max_pdf_minus_count, max_pdf_plus_count, poisson_weights, zero_mass_count,
    zero_mass_count_exact, zero_mass_odd_by_triangle, zero_mass_odd_split_form, zero_mass_unconditional,
};
use crate::model::{check_beta, check_horizon, InitialVelocity, LawValue, MotionParams};
use crate::position::{position_atoms, position_pdf, position_pdf_given_count};
use crate::quadrature::{integrate, QuadConfig, QuadResult};
use crate::simulate::{empirical_max_cdf, HasMax, MonteCarlo, PathLaw};
use crate::special::{bessel_i, log_factorial, SeriesConfig, MAX_BINOMIAL_N};

// ---------------------------------------------------------------------------
// Iterated-integral oracle

struct Nested<'a> {
    c1: f64,
    c2: f64,
    t: f64,
    beta: f64,
    k: u32,
    j: u32,
    /// `(2k)! / t^(2k)`, the order-statistics density constant.
    norm: f64,
    cfg: &'a QuadConfig,
    failure: RefCell<Option<TelemaxError>>,
    inner_error: Cell<f64>,
}

impl Nested<'_> {
    fn quad<F: FnMut(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        match integrate(f, lo, hi, self.cfg) {
            Ok(r) => {
                self.inner_error.set(self.inner_error.get().max(r.error));
                r.value
            }
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    /// Rightward leg `i` starting at time `s` from level `x`: it must end
    /// below `beta`.
    fn odd(&self, i: u32, s: f64, x: f64) -> f64 {
        let hi = s + (self.beta - x) / self.c1;
        self.quad(|u| self.even(i, u, x + self.c1 * (u - s)), s, hi)
    }

    /// Leftward leg `i` starting at `s` from `x`. Before the last leg the
    /// particle must still be able to reach `beta`; on the last leg it must
    /// go far enough left that it never can.
    fn even(&self, i: u32, s: f64, x: f64) -> f64 {
        let tau = (x + self.c2 * s + self.c1 * self.t - self.beta) / (self.c1 + self.c2);
        if i == self.j {
            let m = 2 * (self.k - self.j);
            let lf = log_factorial(m);
            self.quad(
                |u| self.norm * ((self.t - u).powi(m as i32).ln() - lf).exp(),
                tau,
                self.t,
            )
        } else {
            self.quad(|u| self.odd(i + 1, u, x - self.c2 * (u - s)), s, tau)
        }
    }
}

/// `P{max < beta | V(0) = c1, N(t) = 2k}` by direct iterated quadrature over
/// the first `2j` reversal epochs, summed over the leg `j` on which the path
/// falls out of reach of `beta`.
pub fn nested_integral_cdf_plus(p: &MotionParams, t: f64, beta: f64, k: u32, cfg: &QuadConfig) -> Result<QuadResult> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    if !(1..=2).contains(&k) {
        return domain(format!("iterated quadrature supports k = 1 or 2, got {k}"));
    }
    let norm = (log_factorial(2 * k) - f64::from(2 * k) * t.ln()).exp();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut intervals = 0;
    for j in 1..=k {
        let nest = Nested {
            c1: p.c1(),
            c2: p.c2(),
            t,
            beta,
            k,
            j,
            norm,
            cfg,
            failure: RefCell::new(None),
            inner_error: Cell::new(0.0),
        };
        let hi = beta / p.c1();
        if hi > 0.0 {
            let outer = integrate(|u| nest.even(1, u, p.c1() * u), 0.0, hi, cfg);
            if let Some(e) = nest.failure.into_inner() {
                return Err(e);
            }
            let outer = outer?;
            value += outer.value;
            // Inner errors integrate over nested ranges no longer than t each.
            error += outer.error + nest.inner_error.get() * t.max(1.0).powi(2 * j as i32 - 1);
            intervals += outer.intervals;
        }
    }
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// The two-reversal law in its factored closed form
/// `beta (beta (c1 - c2) + 2 c1 c2 t) / ((c1 + c2) c1^2 t^2)`.
pub fn cdf_plus_two_closed_form(p: &MotionParams, t: f64, beta: f64) -> Result<f64> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let (c1, c2) = (p.c1(), p.c2());
    Ok(beta * (beta * (c1 - c2) + 2.0 * c1 * c2 * t) / ((c1 + c2) * c1 * c1 * t * t))
}

/// The four-reversal law written out term by term.
pub fn cdf_plus_four_closed_form(p: &MotionParams, t: f64, beta: f64) -> Result<f64> {
    check_horizon(t)?;
    check_beta(p, t, beta)?;
    let (c1, c2) = (p.c1(), p.c2());
    let a = c1 * t - beta;
    let b = c2 * t + beta;
    let r = c2 / c1;
    let l = (c1 + c2) * t;
    Ok((4.0 * a * b.powi(3) - 4.0 * r * r * a.powi(3) * b + b.powi(4) - r.powi(4) * a.powi(4)) / l.powi(4))
}

// ---------------------------------------------------------------------------
// Poisson-mixture oracles

/// Agreement between a series value and a mixture value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    pub series: LawValue,
    pub mixture: LawValue,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Rounding allowance on top of the certified bounds of both routes.
const MIXTURE_ROUNDING: f64 = 1e-13;

impl MixtureReport {
    pub fn compare(series: LawValue, mixture: LawValue) -> Self {
        let gap = (series.value - mixture.value).abs();
        let tolerance = series.abs_error_bound + mixture.abs_error_bound + MIXTURE_ROUNDING;
        Self {
            series,
            mixture,
            gap,
            tolerance,
            pass: gap <= tolerance,
        }
    }
}

/// Unconditional Bessel-series CDF against the Poisson mixture of the
/// conditional polynomials.
pub fn mixture_crosscheck(
    p: &MotionParams,
    t: f64,
    beta: f64,
    v0: InitialVelocity,
    cfg: &SeriesConfig,
) -> Result<MixtureReport> {
    let series = match v0 {
        InitialVelocity::Plus => max_cdf_plus_unconditional(p, t, beta, cfg)?,
        InitialVelocity::Minus => max_cdf_minus_unconditional(p, t, beta, cfg)?,
    };
    let mixture = max_cdf_poisson_mixture(p, t, beta, v0, cfg.tail_tolerance)?;
    Ok(MixtureReport::compare(series, mixture))
}

/// Position density as a Poisson mixture of the fixed-count laws, with the
/// initial velocity drawn uniformly.
pub fn position_pdf_poisson_mixture(p: &MotionParams, t: f64, x: f64, tail_tolerance: f64) -> Result<LawValue> {
    check_horizon(t)?;
    let (w, tail) = poisson_weights(p.lambda() * t, tail_tolerance, MAX_BINOMIAL_N)?;
    let mut acc = 0.0;
    for (n, &wn) in w.iter().enumerate().skip(1) {
        acc += wn * position_pdf_given_count(p, t, x, n as u32, None)?.value;
    }
    // Each fixed-count density is at most n / ((c1 + c2) t) in the bulk; the
    // bound below covers the truncated weights through the largest kept count.
    let bound = tail * w.len() as f64 / ((p.c1() + p.c2()) * t);
    Ok(LawValue::with_bound(acc, bound))
}

// ---------------------------------------------------------------------------
// Monte Carlo comparison

/// Which inequality the analytic CDF uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `P{max < beta}`.
    Strict,
    /// `P{max <= beta}`.
    Weak,
}

impl Inequality {
    /// The convention matching each starting velocity.
    pub fn for_start(v0: InitialVelocity) -> Self {
        match v0 {
            InitialVelocity::Plus => Inequality::Strict,
            InitialVelocity::Minus => Inequality::Weak,
        }
    }
}

pub const KS_MIN_SAMPLES: usize = 10_000;
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsPoint {
    pub beta: f64,
    pub analytic: f64,
    pub empirical: f64,
    pub z: f64,
}

/// Grid comparison of an analytic CDF with an empirical one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub samples: usize,
    pub sup_gap: f64,
    pub max_abs_z: f64,
    pub points: Vec<KsPoint>,
    pub pass: bool,
}

/// z-scores use the analytic variance `F (1 - F) / N`. Where `F` is 0 or 1
/// any disagreement is infinitely significant.
pub fn ks_report<F, S>(cdf: F, samples: &[S], grid: &[f64], side: Inequality) -> Result<KsReport>
where
    F: Fn(f64) -> Result<f64>,
    S: HasMax,
{
    if samples.len() < KS_MIN_SAMPLES {
        return domain(format!(
            "at least {KS_MIN_SAMPLES} samples are needed, got {}",
            samples.len()
        ));
    }
    let n = samples.len() as f64;
    let emp = empirical_max_cdf(samples, grid)?;
    let mut points = Vec::with_capacity(grid.len());
    for e in emp {
        let analytic = cdf(e.beta)?;
        let empirical = match side {
            Inequality::Strict => e.below,
            Inequality::Weak => e.at_most,
        };
        let var = analytic * (1.0 - analytic) / n;
        let diff = empirical - analytic;
        let z = if var > 0.0 {
            diff / var.sqrt()
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        points.push(KsPoint {
            beta: e.beta,
            analytic,
            empirical,
            z,
        });
    }
    let sup_gap = points
        .iter()
        .map(|q| (q.empirical - q.analytic).abs())
        .fold(0.0, f64::max);
    let max_abs_z = points.iter().map(|q| q.z.abs()).fold(0.0, f64::max);
    Ok(KsReport {
        samples: samples.len(),
        sup_gap,
        max_abs_z,
        points,
        pass: max_abs_z < Z_THRESHOLD,
    })
}

// ---------------------------------------------------------------------------
// Argmax

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns the abscissa and the value there.
pub fn golden_section_argmax<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) || !(x_tol > 0.0) {
        return domain(format!("bad bracket [{lo}, {hi}] or tolerance {x_tol}"));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > x_tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// A numerically located mode and the candidate closed forms it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxReport {
    pub numeric: f64,
    pub density_at_max: f64,
    pub candidates: Vec<(String, f64)>,
    /// Label of the first candidate within `tolerance` of the numeric mode.
    pub matched: Option<String>,
    pub tolerance: f64,
}

fn argmax_report<F: FnMut(f64) -> Result<f64>>(
    f: F,
    hi: f64,
    candidates: Vec<(String, f64)>,
    tolerance: f64,
) -> Result<ArgmaxReport> {
    // Both ends are open for the densities, so stay a hair inside.
    let pad = hi * 1e-12;
    let (numeric, density_at_max) = golden_section_argmax(f, pad, hi - pad, tolerance * 1e-3)?;
    let matched = candidates
        .iter()
        .find(|(_, v)| (v - numeric).abs() <= tolerance)
        .map(|(l, _)| l.clone());
    Ok(ArgmaxReport {
        numeric,
        density_at_max,
        candidates,
        matched,
        tolerance,
    })
}

/// Mode of the three-reversal density from a negative start.
pub fn minus_three_argmax(p: &MotionParams, t: f64, tolerance: f64) -> Result<ArgmaxReport> {
    check_horizon(t)?;
    let (c1, c2) = (p.c1(), p.c2());
    let candidates = vec![
        (
            "c1 t (c1^2 - c2^2 - c1 c2) / (2 c1 - c2)".to_string(),
            c1 * t * (c1 * c1 - c2 * c2 - c1 * c2) / (2.0 * c1 - c2),
        ),
        (
            "c1 t (1 + c1 (c1 + c2) / (c2^2 - 2 c1^2))".to_string(),
            c1 * t * (1.0 + c1 * (c1 + c2) / (c2 * c2 - 2.0 * c1 * c1)),
        ),
    ];
    argmax_report(
        |b| Ok(max_pdf_minus_count(p, t, b, 3)?.value),
        c1 * t,
        candidates,
        tolerance,
    )
}

/// Mode of the three-reversal density from a positive start.
pub fn plus_three_argmax(p: &MotionParams, t: f64, tolerance: f64) -> Result<ArgmaxReport> {
    check_horizon(t)?;
    let (c1, c2) = (p.c1(), p.c2());
    let candidates = vec![(
        "c1 (c1 - c2) t / (2 c1 - c2)".to_string(),
        c1 * (c1 - c2) * t / (2.0 * c1 - c2),
    )];
    argmax_report(
        |b| Ok(max_pdf_plus_count(p, t, b, 3)?.value),
        c1 * t,
        candidates,
        tolerance,
    )
}

// ---------------------------------------------------------------------------
// Suites

/// Named groups of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Iterated quadrature against the two- and four-reversal closed forms.
    Oracle,
    /// Conditional Monte Carlo against the polynomial CDFs.
    Conditional,
    /// Zero atom values, exact cyclicity, Monte Carlo atom frequency.
    Atoms,
    /// A-triangle rows and the triangle form of the zero atom.
    Triangle,
    /// Bessel series against Poisson mixtures and boundary values.
    Unconditional,
    /// Densities plus atoms integrate to one.
    Normalization,
    /// Second-order residual decay of the EPD family operators.
    Epd,
    /// Equal-speed identities.
    Symmetric,
    /// Modes of the three-reversal densities.
    Argmax,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Oracle,
        Suite::Conditional,
        Suite::Atoms,
        Suite::Triangle,
        Suite::Unconditional,
        Suite::Normalization,
        Suite::Epd,
        Suite::Symmetric,
        Suite::Argmax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Conditional => "conditional",
            Suite::Atoms => "atoms",
            Suite::Triangle => "triangle",
            Suite::Unconditional => "unconditional",
            Suite::Normalization => "normalization",
            Suite::Epd => "epd",
            Suite::Symmetric => "symmetric",
            Suite::Argmax => "argmax",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = TelemaxError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| TelemaxError::Domain(format!("unknown suite {s:?}")))
    }
}

/// Seed and Monte Carlo budget shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
}

/// One line of a validation report. `observed` is compared against
/// `tolerance` unless the check says otherwise in its name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(suite: Suite, name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            observed,
            tolerance,
            pass: observed <= tolerance,
        }
    }

    fn flag(suite: Suite, name: impl Into<String>, pass: bool) -> Self {
        Self {
            suite,
            name: name.into(),
            observed: if pass { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the given suites in order.
pub fn run_suites(suites: &[Suite], cfg: &SuiteConfig) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for &s in suites {
        checks.extend(run_suite(s, cfg)?);
    }
    Ok(ValidationReport {
        seed: cfg.seed,
        samples: cfg.samples,
        checks,
    })
}

/// Each suite draws from its own seeded generator, so suites can be run
/// separately with identical results.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(suite as u64 + 1);
    match suite {
        Suite::Oracle => suite_oracle(&mut rng),
        Suite::Conditional => suite_conditional(cfg),
        Suite::Atoms => suite_atoms(&mut rng, cfg),
        Suite::Triangle => suite_triangle(&mut rng),
        Suite::Unconditional => suite_unconditional(&mut rng),
        Suite::Normalization => suite_normalization(&mut rng),
        Suite::Epd => suite_epd(&mut rng),
        Suite::Symmetric => suite_symmetric(&mut rng),
        Suite::Argmax => suite_argmax(),
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> MotionParams {
    MotionParams::new(rng.random_range(0.5..3.0), rng.random_range(0.5..3.0), 1.0).expect("positive speeds")
}

fn suite_oracle(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let cfg = QuadConfig::default();
    let (mut gap2, mut gap4, mut gap_poly) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = random_params(rng);
        let t = rng.random_range(0.5..2.0);
        let beta = rng.random_range(0.0..=1.0) * p.c1() * t;
        let n2 = nested_integral_cdf_plus(&p, t, beta, 1, &cfg)?.value;
        let n4 = nested_integral_cdf_plus(&p, t, beta, 2, &cfg)?.value;
        gap2 = gap2.max((n2 - cdf_plus_two_closed_form(&p, t, beta)?).abs());
        gap4 = gap4.max((n4 - cdf_plus_four_closed_form(&p, t, beta)?).abs());
        gap_poly = gap_poly
            .max((n2 - max_cdf_plus_count(&p, t, beta, 2)?.value).abs())
            .max((n4 - max_cdf_plus_count(&p, t, beta, 4)?.value).abs());
    }
    let s = Suite::Oracle;
    Ok(vec![
        Check::within(
            s,
            "iterated quadrature k=1 vs two-reversal closed form, 50 tuples",
            gap2,
            1e-8,
        ),
        Check::within(
            s,
            "iterated quadrature k=2 vs four-reversal closed form, 50 tuples",
            gap4,
            1e-6,
        ),
        Check::within(s, "iterated quadrature vs general conditional CDF", gap_poly, 1e-6),
    ])
}

fn suite_conditional(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let p = MotionParams::new(2.0, 1.0, 1.0)?;
    let t = 1.0;
    let grid: Vec<f64> = (1..=20).map(|i| p.c1() * t * f64::from(i) / 21.0).collect();
    let mut out = Vec::new();
    for v0 in [InitialVelocity::Plus, InitialVelocity::Minus] {
        for n in [1u32, 2, 3, 4, 8] {
            let mc = MonteCarlo {
                params: p,
                t,
                v0,
                law: PathLaw::GivenCount { n },
                seed: cfg.seed ^ (u64::from(n) << 8) ^ (v0 as u64),
            };
            let samples = mc.summaries(cfg.samples)?;
            let rep = ks_report(
                |b| {
                    Ok(match v0 {
                        InitialVelocity::Plus => max_cdf_plus_count(&p, t, b, n)?.value,
                        InitialVelocity::Minus => max_cdf_minus_count(&p, t, b, n)?.value,
                    })
                },
                &samples,
                &grid,
                Inequality::for_start(v0),
            )?;
            out.push(Check::within(
                Suite::Conditional,
                format!("max |z| over 20 thresholds, v0 = {}, n = {n}", v0.as_str()),
                rep.max_abs_z,
                Z_THRESHOLD,
            ));
        }
    }
    Ok(out)
}

fn suite_atoms(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let s = Suite::Atoms;
    let mut out = Vec::new();
    let sym = MotionParams::symmetric(1.0, 0.0)?;
    out.push(Check::within(
        s,
        "equal speeds, n = 2: atom = 1/2",
        (zero_mass_count(&sym, 2)?.value - 0.5).abs(),
        1e-15,
    ));
    let mut exact = true;
    for _ in 0..5 {
        let c1 = BigRational::new(
            BigInt::from(rng.random_range(1..50)),
            BigInt::from(rng.random_range(1..50)),
        );
        let c2 = BigRational::new(
            BigInt::from(rng.random_range(1..50)),
            BigInt::from(rng.random_range(1..50)),
        );
        for k in 1..=10 {
            exact &= zero_mass_count_exact(&c1, &c2, 2 * k - 1)? == zero_mass_count_exact(&c1, &c2, 2 * k)?;
        }
    }
    out.push(Check::flag(
        s,
        "exact rational atom at n = 2k-1 equals n = 2k, k <= 10",
        exact,
    ));
    let p = MotionParams::new(2.0, 1.0, 1.0)?;
    let mut worst = 0.0f64;
    for n in 1..=6u32 {
        let mc = MonteCarlo {
            params: p,
            t: 1.0,
            v0: InitialVelocity::Minus,
            law: PathLaw::GivenCount { n },
            seed: cfg.seed.wrapping_add(u64::from(n)),
        };
        let samples = mc.summaries(cfg.samples)?;
        let atom = zero_mass_count(&p, n)?.value;
        let e = empirical_max_cdf(&samples, &[0.0])?[0];
        let se = (atom * (1.0 - atom) / samples.len() as f64).sqrt();
        worst = worst.max((e.at_most - atom).abs() / se);
    }
    out.push(Check::within(
        s,
        "Monte Carlo atom frequency, n = 1..6, max |z|",
        worst,
        Z_THRESHOLD,
    ));
    Ok(out)
}

fn suite_triangle(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let s = Suite::Triangle;
    let table: [&[u128]; 6] = [
        &[1],
        &[1, 1],
        &[1, 2, 2],
        &[1, 3, 5, 5],
        &[1, 4, 9, 14, 14],
        &[1, 5, 14, 28, 42, 42],
    ];
    let mut rows = true;
    for (k, row) in table.iter().enumerate() {
        rows &= a_triangle(k as u32)?.as_slice() == *row;
    }
    let mut gap = 0.0f64;
    for _ in 0..20 {
        let p = random_params(rng);
        for k in 0..=6 {
            gap = gap.max((zero_mass_odd_by_triangle(&p, k)? - zero_mass_odd_split_form(&p, k)?).abs());
        }
    }
    Ok(vec![
        Check::flag(s, "rows 0..5 match the tabulated triangle", rows),
        Check::within(s, "triangle form vs split form of the odd atom, k <= 6", gap, 1e-12),
    ])
}

fn suite_unconditional(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let s = Suite::Unconditional;
    let cfg = SeriesConfig::default();
    let mut out = Vec::new();
    for lt in [0.1, 1.0, 5.0] {
        let (mut gap, mut edge_plus, mut edge_minus, mut atom) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..5 {
            let base = random_params(rng);
            let t = rng.random_range(0.5..2.0);
            let p = base.with_lambda(lt / t)?;
            for i in 0..=10 {
                let beta = p.c1() * t * (f64::from(i) / 10.0);
                for v0 in [InitialVelocity::Plus, InitialVelocity::Minus] {
                    gap = gap.max(mixture_crosscheck(&p, t, beta, v0, &cfg)?.gap);
                }
            }
            let top = p.c1() * t;
            edge_plus =
                edge_plus.max((max_cdf_plus_unconditional(&p, t, top, &cfg)?.value - (1.0 - (-lt).exp())).abs());
            edge_minus = edge_minus.max((max_cdf_minus_unconditional(&p, t, top, &cfg)?.value - 1.0).abs());
            let c = p.c1();
            let sym = MotionParams::symmetric(c, lt / t)?;
            let want = (-lt).exp() * (bessel_i(0, lt, &cfg)?.value + bessel_i(1, lt, &cfg)?.value);
            atom = atom.max((zero_mass_unconditional(&sym, t, &cfg)?.value - want).abs());
        }
        out.push(Check::within(
            s,
            format!("series vs Poisson mixture, lambda t = {lt}"),
            gap,
            1e-9,
        ));
        out.push(Check::within(
            s,
            format!("plus CDF at c1 t = 1 - exp(-lambda t), lambda t = {lt}"),
            edge_plus,
            1e-10,
        ));
        out.push(Check::within(
            s,
            format!("minus CDF at c1 t = 1, lambda t = {lt}"),
            edge_minus,
            1e-10,
        ));
        out.push(Check::within(
            s,
            format!("equal-speed zero atom, lambda t = {lt}"),
            atom,
            1e-10,
        ));
    }
    Ok(out)
}

fn suite_normalization(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let s = Suite::Normalization;
    let q = QuadConfig::default();
    let mut params = vec![MotionParams::new(2.0, 1.0, 1.0)?];
    params.extend((0..3).map(|_| random_params(rng)));
    let (mut plus, mut minus) = (0.0f64, 0.0f64);
    for p in &params {
        let t = 1.3;
        let top = p.c1() * t;
        for n in 1..=10 {
            let ip = integrate(
                |b| max_pdf_plus_count(p, t, b, n).map_or(f64::NAN, |v| v.value),
                0.0,
                top,
                &q,
            )?;
            plus = plus.max((ip.value - 1.0).abs());
            let im = integrate(
                |b| max_pdf_minus_count(p, t, b, n).map_or(f64::NAN, |v| v.value),
                0.0,
                top,
                &q,
            )?;
            minus = minus.max((im.value - (1.0 - zero_mass_count(p, n)?.value)).abs());
        }
    }
    let cfg = SeriesConfig::default();
    let mut pos = 0.0f64;
    for &(c1, c2, lambda, t) in &[(2.0, 1.0, 1.0, 1.0), (1.0, 1.0, 3.0, 0.7), (0.6, 2.2, 0.4, 2.0)] {
        let p = MotionParams::new(c1, c2, lambda)?;
        let (lo, hi) = p.support(t);
        let body = integrate(
            |x| position_pdf(&p, t, x, &cfg).map_or(f64::NAN, |v| v.value),
            lo,
            hi,
            &q,
        )?;
        let (a, b) = position_atoms(&p, t)?;
        pos = pos.max((body.value + a + b - 1.0).abs());
    }
    Ok(vec![
        Check::within(
            s,
            "plus-start conditional densities integrate to 1, n <= 10",
            plus,
            1e-9,
        ),
        Check::within(
            s,
            "minus-start conditional densities integrate to 1 - atom, n <= 10",
            minus,
            1e-9,
        ),
        Check::within(s, "position density plus endpoint atoms = 1", pos, 1e-9),
    ])
}

/// Five random interior points per family; each must decay at second
/// order until it reaches the rounding floor, with at least one measured ratio.
fn suite_epd(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let s = Suite::Epd;
    let mut out = Vec::new();
    let families: [(&str, EpdFamily); 5] = [
        ("G", EpdFamily::G),
        ("H", EpdFamily::H),
        ("K", EpdFamily::K),
        ("telegraph", EpdFamily::TelegraphP),
        ("non-homogeneous", EpdFamily::NonHom { alpha: 1.5 }),
    ];
    for (label, family) in families {
        let mut ok = true;
        let mut worst_ratio_dev = 0.0f64;
        for _ in 0..5 {
            let lambda = if family == EpdFamily::TelegraphP {
                rng.random_range(0.5..3.0)
            } else {
                0.0
            };
            let p = MotionParams::new(rng.random_range(0.5..3.0), rng.random_range(0.5..3.0), lambda)?;
            let spec = EpdSpec::new(
                rng.random_range(1.5..4.0),
                rng.random_range(1.5..4.0),
                rng.random_range(-2.0..3.0),
                family,
            )?;
            let t0 = rng.random_range(0.8..1.5);
            let frac: f64 = rng.random_range(0.2..0.8);
            let x0 = -p.c2() * t0 + frac * (p.c1() + p.c2()) * t0;
            let room = (x0 + p.c2() * t0).min(p.c1() * t0 - x0);
            let h = 0.02 * room.min(t0) / (1.0 + p.c1().max(p.c2()));
            let rep = epd_residual(&spec, &p, &GridSpec { x0, t0, h, levels: 6 })?;
            ok &= rep.is_second_order() && measured_ratios(&rep) > 0;
            worst_ratio_dev = worst_ratio_dev.max(ratio_deviation(&rep));
        }
        out.push(Check::flag(
            s,
            format!("{label}: second-order decay to the rounding floor at 5 points"),
            ok,
        ));
        out.push(Check::within(
            s,
            format!("{label}: largest |ratio - 4| above the floor"),
            worst_ratio_dev,
            0.5,
        ));
    }
    type Q = Ratio<i64>;
    let mut exact = true;
    for _ in 0..5 {
        let mut q = || Q::new(rng.random_range(1..40), rng.random_range(1..12));
        let (m, n, c1, c2) = (q(), q(), q(), q());
        exact &= k_coefficients(m, n, Q::from_integer(1), c1, c2) == h_coefficients(m, n, c1, c2);
        exact &= k_coefficients(m, n, -(m + n), c1, c2) == g_coefficients(m, n, c1, c2);
    }
    out.push(Check::flag(
        s,
        "K coefficients reduce to H at r = 1 and G at r = -(m+n), exactly",
        exact,
    ));
    Ok(out)
}

/// Ratios between two levels that are both above the rounding floor.
pub fn measured_ratios(rep: &ConvergenceReport) -> usize {
    rep.levels
        .windows(2)
        .filter(|w| !w[0].at_floor() && !w[1].at_floor())
        .count()
}

fn ratio_deviation(rep: &ConvergenceReport) -> f64 {
    rep.levels
        .windows(2)
        .zip(&rep.ratios)
        .filter(|(w, _)| !w[0].at_floor() && !w[1].at_floor())
        .map(|(_, r)| (r - 4.0).abs())
        .fold(0.0, f64::max)
}

fn suite_symmetric(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let s = Suite::Symmetric;
    let c = rng.random_range(0.5..2.0);
    let t = rng.random_range(0.5..2.0);
    let p = MotionParams::symmetric(c, 1.0)?;
    let grid: Vec<f64> = (1..=100).map(|i| c * t * f64::from(i) / 101.0).collect();
    let (mut parity, mut reflect, mut mix) = (0.0f64, 0.0f64, 0.0f64);
    for &b in &grid {
        for k in 1..=10u32 {
            let odd = max_cdf_plus_count(&p, t, b, 2 * k - 1)?.value;
            let even = max_cdf_plus_count(&p, t, b, 2 * k)?.value;
            parity = parity.max((odd - even).abs());
        }
        for n in 1..=10u32 {
            let pdf = max_pdf_plus_count(&p, t, b, n)?.value;
            let pos = position_pdf_given_count(&p, t, b, n, None)?.value;
            reflect = reflect.max((pdf - 2.0 * pos).abs());
        }
        for k in 1..=8u32 {
            let kf = f64::from(k);
            let lhs = max_pdf_minus_count(&p, t, b, 2 * k + 1)?.value;
            let rhs = (2.0 * kf + 1.0) / (2.0 * kf + 2.0) * max_pdf_minus_count(&p, t, b, 2 * k)?.value
                + max_pdf_plus_count(&p, t, b, 2 * k + 1)?.value / (2.0 * kf + 2.0);
            mix = mix.max((lhs - rhs).abs());
        }
    }
    Ok(vec![
        Check::within(s, "CDF at n = 2k-1 equals n = 2k, k <= 10, 100 points", parity, 1e-12),
        Check::within(
            s,
            "max density = 2 x position density, n <= 10, 100 points",
            reflect,
            1e-12,
        ),
        Check::within(
            s,
            "odd minus-start density = weighted mixture, k <= 8, 100 points",
            mix,
            1e-12,
        ),
    ])
}

fn suite_argmax() -> Result<Vec<Check>> {
    let s = Suite::Argmax;
    let p = MotionParams::new(2.0, 1.0, 1.0)?;
    let minus = minus_three_argmax(&p, 1.0, 1e-6)?;
    let plus = plus_three_argmax(&p, 1.0, 1e-6)?;
    Ok(vec![
        Check::within(
            s,
            "minus-start n = 3 mode vs 2/7",
            (minus.numeric - 2.0 / 7.0).abs(),
            1e-6,
        ),
        Check::flag(
            s,
            "minus-start n = 3 mode matches c1 t (1 + c1 (c1 + c2) / (c2^2 - 2 c1^2)) only",
            minus.matched.as_deref() == Some(minus.candidates[1].0.as_str())
                && (minus.candidates[0].1 - minus.numeric).abs() > 1e-6,
        ),
        Check::within(
            s,
            "plus-start n = 3 mode vs c1 (c1 - c2) t / (2 c1 - c2)",
            (plus.numeric - plus.candidates[0].1).abs(),
            1e-6,
        ),
    ])
}
