//! Event-driven Monte Carlo sampling of telegraph paths.
//!
//! Paths are piecewise linear, so the running maximum is read off the
//! vertices exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TelemaxError};
use crate::model::{check_horizon, InitialVelocity, MotionParams};

/// Samples drawn from one sub-stream before moving to the next.
pub const CHUNK_SIZE: usize = 4096;

/// Default start offset, as a fraction of `t`, for the rate `alpha / t`.
pub const DEFAULT_EPD_EPSILON: f64 = 1e-9;

/// One simulated trajectory on `[0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub v0: InitialVelocity,
    pub switch_times: Vec<f64>,
    pub horizon: f64,
    pub realized_max: f64,
    pub endpoint: f64,
}

impl PathSample {
    /// Assembles a path from its reversal epochs, which must be strictly
    /// increasing inside `(0, t)`.
    pub fn from_switches(p: &MotionParams, t: f64, v0: InitialVelocity, switch_times: Vec<f64>) -> Result<Self> {
        check_horizon(t)?;
        let mut prev = 0.0;
        for &s in &switch_times {
            if !(s > prev && s < t) {
                return domain(format!("switch times must increase strictly inside (0, {t})"));
            }
            prev = s;
        }
        let (realized_max, endpoint) = walk(p, t, v0, &switch_times);
        Ok(Self {
            v0,
            switch_times,
            horizon: t,
            realized_max,
            endpoint,
        })
    }

    /// Position at time `s`, by linear interpolation between vertices.
    pub fn position_at(&self, p: &MotionParams, s: f64) -> f64 {
        let mut pos = 0.0;
        let mut last = 0.0;
        let mut v = self.v0.speed(p);
        for &e in &self.switch_times {
            if e >= s {
                return pos + v * (s - last);
            }
            pos += v * (e - last);
            last = e;
            v = flip(p, v);
        }
        pos + v * (s - last)
    }
}

fn flip(p: &MotionParams, v: f64) -> f64 {
    if v > 0.0 {
        -p.c2()
    } else {
        p.c1()
    }
}

/// Maximum over the vertices and the endpoint.
fn walk(p: &MotionParams, t: f64, v0: InitialVelocity, switches: &[f64]) -> (f64, f64) {
    let mut pos = 0.0;
    let mut max = 0.0f64;
    let mut last = 0.0;
    let mut v = v0.speed(p);
    for &s in switches {
        pos += v * (s - last);
        if v > 0.0 {
            max = max.max(pos);
        }
        last = s;
        v = flip(p, v);
    }
    pos += v * (t - last);
    if v > 0.0 {
        max = max.max(pos);
    }
    (max, pos)
}

/// Reproducible random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// How reversal epochs are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum PathLaw {
    /// Poisson reversals with the constant rate of the motion parameters.
    Homogeneous,
    /// Exactly `n` reversals at sorted uniform epochs.
    GivenCount { n: u32 },
    /// Rate `alpha / s`, with the clock started at `epsilon t`.
    EpdRate { alpha: f64, epsilon: f64 },
}

impl PathLaw {
    fn validate(&self) -> Result<()> {
        if let PathLaw::EpdRate { alpha, epsilon } = *self {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return domain(format!("alpha must be positive, got {alpha}"));
            }
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return domain(format!("epsilon must lie in (0, 1), got {epsilon}"));
            }
        }
        Ok(())
    }
}

fn draw_switches<R: Rng + ?Sized>(p: &MotionParams, t: f64, law: &PathLaw, rng: &mut R, buf: &mut Vec<f64>) {
    buf.clear();
    match *law {
        PathLaw::Homogeneous => {
            if p.lambda() > 0.0 {
                let exp = Exp::new(p.lambda()).expect("positive rate");
                let mut s = exp.sample(rng);
                while s < t {
                    buf.push(s);
                    s += exp.sample(rng);
                }
            }
        }
        PathLaw::GivenCount { n } => {
            for _ in 0..n {
                let u: f64 = Open01.sample(rng);
                buf.push(u * t);
            }
            buf.sort_by(f64::total_cmp);
        }
        PathLaw::EpdRate { alpha, epsilon } => {
            // P{next > s' | s} = (s / s')^alpha.
            let mut s = epsilon * t;
            loop {
                let e: f64 = Exp1.sample(rng);
                s *= (e / alpha).exp();
                if s >= t {
                    break;
                }
                buf.push(s);
            }
        }
    }
}

/// One path with Poisson reversals at rate `lambda`.
pub fn sample_path<R: Rng + ?Sized>(p: &MotionParams, t: f64, v0: InitialVelocity, rng: &mut R) -> Result<PathSample> {
    sample_with(p, t, v0, &PathLaw::Homogeneous, rng)
}

/// One path with exactly `n` reversals.
pub fn sample_path_given_count<R: Rng + ?Sized>(
    p: &MotionParams,
    t: f64,
    v0: InitialVelocity,
    n: u32,
    rng: &mut R,
) -> Result<PathSample> {
    sample_with(p, t, v0, &PathLaw::GivenCount { n }, rng)
}

/// One path with reversal rate `alpha / s`, started at `epsilon t`.
///
/// The rate is not integrable at zero, so the process would reverse
/// infinitely often near the origin. The clock starts at `epsilon t` with
/// velocity `v0` held on `[0, epsilon t]`.
pub fn sample_path_epd_rate<R: Rng + ?Sized>(
    p: &MotionParams,
    alpha: f64,
    epsilon: f64,
    t: f64,
    v0: InitialVelocity,
    rng: &mut R,
) -> Result<PathSample> {
    sample_with(p, t, v0, &PathLaw::EpdRate { alpha, epsilon }, rng)
}

fn sample_with<R: Rng + ?Sized>(
    p: &MotionParams,
    t: f64,
    v0: InitialVelocity,
    law: &PathLaw,
    rng: &mut R,
) -> Result<PathSample> {
    check_horizon(t)?;
    law.validate()?;
    let mut buf = Vec::new();
    draw_switches(p, t, law, rng, &mut buf);
    let (realized_max, endpoint) = walk(p, t, v0, &buf);
    Ok(PathSample {
        v0,
        switch_times: buf,
        horizon: t,
        realized_max,
        endpoint,
    })
}

/// Compact per-path record for large runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub realized_max: f64,
    pub endpoint: f64,
    pub switches: u32,
}

/// A Monte Carlo experiment: what to sample and from which seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub params: MotionParams,
    pub t: f64,
    pub v0: InitialVelocity,
    pub law: PathLaw,
    pub seed: u64,
}

impl MonteCarlo {
    fn check(&self) -> Result<()> {
        check_horizon(self.t)?;
        self.law.validate()
    }

    fn chunks(count: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
        let n_chunks = count.div_ceil(CHUNK_SIZE);
        (0..n_chunks).into_par_iter().map(move |c| {
            let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            (c as u64, len)
        })
    }

    /// Full paths. Chunk `c` draws from stream `c`, so the output does not
    /// depend on the number of worker threads.
    pub fn paths(&self, count: usize) -> Result<Vec<PathSample>> {
        self.check()?;
        let out: Vec<Vec<PathSample>> = Self::chunks(count)
            .map(|(c, len)| {
                let mut rng = RngStream::new(self.seed, c).rng();
                (0..len)
                    .map(|_| sample_with(&self.params, self.t, self.v0, &self.law, &mut rng).expect("validated"))
                    .collect()
            })
            .collect();
        Ok(out.into_iter().flatten().collect())
    }

    /// Maxima, endpoints and reversal counts, without storing epochs.
    /// Draws the same random numbers as [`MonteCarlo::paths`].
    pub fn summaries(&self, count: usize) -> Result<Vec<PathSummary>> {
        self.check()?;
        let out: Vec<Vec<PathSummary>> = Self::chunks(count)
            .map(|(c, len)| {
                let mut rng = RngStream::new(self.seed, c).rng();
                let mut buf = Vec::new();
                (0..len)
                    .map(|_| {
                        draw_switches(&self.params, self.t, &self.law, &mut rng, &mut buf);
                        let (realized_max, endpoint) = walk(&self.params, self.t, self.v0, &buf);
                        PathSummary {
                            realized_max,
                            endpoint,
                            switches: buf.len() as u32,
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(out.into_iter().flatten().collect())
    }
}

/// Anything that carries a realized maximum.
pub trait HasMax {
    fn realized_max(&self) -> f64;
}

impl HasMax for PathSample {
    fn realized_max(&self) -> f64 {
        self.realized_max
    }
}

impl HasMax for PathSummary {
    fn realized_max(&self) -> f64 {
        self.realized_max
    }
}

impl HasMax for f64 {
    fn realized_max(&self) -> f64 {
        *self
    }
}

/// Empirical CDF of the maximum at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPoint {
    pub beta: f64,
    /// Fraction with `max < beta`.
    pub below: f64,
    /// Fraction with `max <= beta`.
    pub at_most: f64,
    pub se_below: f64,
    pub se_at_most: f64,
}

/// Strict and weak empirical CDFs with binomial standard errors
/// `sqrt(p (1 - p) / N)`.
pub fn empirical_max_cdf<S: HasMax>(samples: &[S], beta_grid: &[f64]) -> Result<Vec<EmpiricalPoint>> {
    if samples.is_empty() {
        return Err(TelemaxError::EmptyInput("no samples"));
    }
    let mut maxima: Vec<f64> = samples.iter().map(HasMax::realized_max).collect();
    maxima.sort_by(f64::total_cmp);
    let n = maxima.len() as f64;
    let se = |q: f64| (q * (1.0 - q) / n).sqrt();
    Ok(beta_grid
        .iter()
        .map(|&beta| {
            let below = maxima.partition_point(|&m| m < beta) as f64 / n;
            let at_most = maxima.partition_point(|&m| m <= beta) as f64 / n;
            EmpiricalPoint {
                beta,
                below,
                at_most,
                se_below: se(below),
                se_at_most: se(at_most),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> MotionParams {
        MotionParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn straight_paths() {
        let p = MotionParams::new(2.0, 3.0, 0.0).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let up = sample_path(&p, 1.5, InitialVelocity::Plus, &mut rng).unwrap();
        assert!(up.switch_times.is_empty());
        assert_eq!((up.endpoint, up.realized_max), (3.0, 3.0));
        let down = sample_path(&p, 1.5, InitialVelocity::Minus, &mut rng).unwrap();
        assert_eq!((down.endpoint, down.realized_max), (-4.5, 0.0));
        let none = sample_path_given_count(&p, 1.5, InitialVelocity::Plus, 0, &mut rng).unwrap();
        assert_eq!(none.endpoint, 3.0);
    }

    #[test]
    fn hand_computed_path() {
        let s = PathSample::from_switches(&unit(), 1.0, InitialVelocity::Plus, vec![0.25, 0.5]).unwrap();
        assert_eq!(s.endpoint, 0.5);
        assert_eq!(s.realized_max, 0.5);
        assert!(PathSample::from_switches(&unit(), 1.0, InitialVelocity::Plus, vec![0.5, 0.25]).is_err());
        assert!(PathSample::from_switches(&unit(), 1.0, InitialVelocity::Plus, vec![1.0]).is_err());
    }

    #[test]
    fn conditional_count_is_exact() {
        let p = MotionParams::new(2.0, 1.0, 3.0).unwrap();
        let mut rng = RngStream::new(9, 4).rng();
        for n in 0..10 {
            let s = sample_path_given_count(&p, 2.0, InitialVelocity::Minus, n, &mut rng).unwrap();
            assert_eq!(s.switch_times.len(), n as usize);
            assert!(s.switch_times.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn dense_resampling_never_exceeds_vertex_max() {
        let p = MotionParams::new(1.7, 0.6, 4.0).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for v0 in [InitialVelocity::Plus, InitialVelocity::Minus] {
            for _ in 0..3 {
                let s = sample_path(&p, 1.0, v0, &mut rng).unwrap();
                let steps = 1_000_000;
                let dense = (0..=steps)
                    .map(|i| s.position_at(&p, f64::from(i) / f64::from(steps)))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(dense <= s.realized_max + 1e-12);
                assert!(s.realized_max - dense <= 1.7 / f64::from(steps) + 1e-12);
            }
        }
    }

    #[test]
    fn runs_are_reproducible_across_thread_counts() {
        let mc = MonteCarlo {
            params: MotionParams::new(2.0, 1.0, 2.0).unwrap(),
            t: 1.0,
            v0: InitialVelocity::Minus,
            law: PathLaw::Homogeneous,
            seed: 42,
        };
        let count = 3 * CHUNK_SIZE + 17;
        let a = mc.paths(count).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = one.install(|| mc.paths(count).unwrap());
        assert_eq!(a, b);
        let s = mc.summaries(count).unwrap();
        assert!(a
            .iter()
            .zip(&s)
            .all(|(x, y)| x.realized_max == y.realized_max && x.endpoint == y.endpoint));
        let other = MonteCarlo { seed: 43, ..mc }.paths(10).unwrap();
        assert_ne!(a[..10], other[..]);
    }

    #[test]
    fn epd_rate_switch_count() {
        let mc = MonteCarlo {
            params: unit(),
            t: 1.0,
            v0: InitialVelocity::Plus,
            law: PathLaw::EpdRate {
                alpha: 1.5,
                epsilon: 1e-6,
            },
            seed: 5,
        };
        let s = mc.summaries(20_000).unwrap();
        let mean = s.iter().map(|x| f64::from(x.switches)).sum::<f64>() / s.len() as f64;
        let expect = 1.5 * 1e6f64.ln();
        // Poisson counts: standard error sqrt(expect / N).
        assert!(
            (mean - expect).abs() < 5.0 * (expect / 20_000.0).sqrt(),
            "{mean} vs {expect}"
        );
    }

    #[test]
    fn empirical_cdf_step() {
        let samples = vec![0.5f64; 10];
        let pts = empirical_max_cdf(&samples, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!((pts[0].below, pts[0].at_most), (0.0, 0.0));
        assert_eq!((pts[1].below, pts[1].at_most), (0.0, 1.0));
        assert_eq!((pts[2].below, pts[2].at_most), (1.0, 1.0));
        assert_eq!(pts[1].se_at_most, 0.0);
        let empty: Vec<f64> = Vec::new();
        assert!(matches!(
            empirical_max_cdf(&empty, &[0.0]),
            Err(TelemaxError::EmptyInput(_))
        ));
    }

    #[test]
    fn bad_epd_settings() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(sample_path_epd_rate(&unit(), 0.0, 1e-9, 1.0, InitialVelocity::Plus, &mut rng).is_err());
        assert!(sample_path_epd_rate(&unit(), 1.0, 0.0, 1.0, InitialVelocity::Plus, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn path_invariants(
            c1 in 0.1f64..5.0, c2 in 0.1f64..5.0, lambda in 0.0f64..20.0, t in 0.1f64..3.0,
            seed in any::<u64>(), plus in any::<bool>()
        ) {
            let p = MotionParams::new(c1, c2, lambda).unwrap();
            let v0 = if plus { InitialVelocity::Plus } else { InitialVelocity::Minus };
            let mut rng = RngStream::new(seed, 0).rng();
            let s = sample_path(&p, t, v0, &mut rng).unwrap();
            prop_assert!(s.switch_times.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.switch_times.iter().all(|&x| x > 0.0 && x < t));
            // Telescoping sum of signed segment lengths.
            let mut edges = vec![0.0];
            edges.extend(&s.switch_times);
            edges.push(t);
            let mut v = v0.speed(&p);
            let mut end = 0.0;
            for w in edges.windows(2) {
                end += v * (w[1] - w[0]);
                v = if v > 0.0 { -c2 } else { c1 };
            }
            prop_assert!((end - s.endpoint).abs() < 1e-12 * (1.0 + end.abs()));
            prop_assert!(s.realized_max >= s.endpoint.max(0.0));
            if plus {
                prop_assert!(s.realized_max > 0.0);
            }
            prop_assert!(s.realized_max <= c1 * t * (1.0 + 1e-12));
        }

        #[test]
        fn same_stream_same_draws(seed in any::<u64>(), stream in any::<u64>()) {
            let p = MotionParams::new(1.0, 2.0, 3.0).unwrap();
            let a = sample_path(&p, 1.0, InitialVelocity::Plus, &mut RngStream::new(seed, stream).rng()).unwrap();
            let b = sample_path(&p, 1.0, InitialVelocity::Plus, &mut RngStream::new(seed, stream).rng()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
