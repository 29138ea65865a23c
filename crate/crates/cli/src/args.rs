//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use telemax::validation::Suite;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "telemax",
    version,
    about = "Running-maximum and position laws of the asymmetric telegraph process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CDF of the running maximum (plus start: P{max < beta}; minus start: P{max <= beta}).
    MaxCdf(MaxArgs),
    /// Density of the running maximum given the number of reversals.
    MaxPdf(MaxArgs),
    /// Point mass of the maximum: at c1 t for a plus start, at 0 for a minus start.
    PointMass(PointMassArgs),
    /// Density of the position at time t.
    PositionPdf(PositionArgs),
    /// Position density when the reversal rate is alpha / t.
    NonhomPdf(NonhomArgs),
    /// Row k of the A-triangle.
    ATriangle(TriangleArgs),
    /// Finite-difference residual of an Euler-Poisson-Darboux operator.
    EpdCheck(EpdArgs),
    /// Monte Carlo paths, or their empirical maximum CDF on a grid.
    Sample(SampleArgs),
    /// Run validation suites.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum V0Arg {
    Plus,
    Minus,
}

impl From<V0Arg> for telemax::InitialVelocity {
    fn from(v: V0Arg) -> Self {
        match v {
            V0Arg::Plus => telemax::InitialVelocity::Plus,
            V0Arg::Minus => telemax::InitialVelocity::Minus,
        }
    }
}

/// `a:b:n`, n equally spaced points from a to b inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected a:b:n, got {s:?}"));
    };
    let a: f64 = a.parse().map_err(|e| format!("grid start: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("grid end: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("grid size: {e}"))?;
    if n == 0 {
        return Err("grid needs at least one point".into());
    }
    if n == 1 {
        return Ok(Grid(vec![a]));
    }
    let step = (b - a) / (n - 1) as f64;
    Ok(Grid(
        (0..n)
            .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
            .collect(),
    ))
}

#[derive(Debug, Args)]
pub struct Motion {
    /// Rightward speed.
    #[arg(long, allow_negative_numbers = true)]
    pub c1: f64,
    /// Leftward speed magnitude.
    #[arg(long, allow_negative_numbers = true)]
    pub c2: f64,
    /// Reversal rate; needed only by laws that are not conditioned on the count.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Time horizon.
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct BetaChoice {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long = "beta-grid", value_parser = parse_grid, value_name = "A:B:N")]
    pub beta_grid: Option<Grid>,
}

impl BetaChoice {
    pub fn points(&self) -> Vec<f64> {
        points(self.beta, &self.beta_grid)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct XChoice {
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long = "x-grid", value_parser = parse_grid, value_name = "A:B:N", allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
}

impl XChoice {
    pub fn points(&self) -> Vec<f64> {
        points(self.x, &self.x_grid)
    }
}

fn points(single: Option<f64>, grid: &Option<Grid>) -> Vec<f64> {
    match (single, grid) {
        (Some(x), _) => vec![x],
        (None, Some(g)) => g.0.clone(),
        (None, None) => Vec::new(),
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CondChoice {
    /// Condition on exactly N reversals in [0, t].
    #[arg(long, value_name = "N")]
    pub count: Option<u32>,
    /// Average over the Poisson number of reversals.
    #[arg(long)]
    pub unconditional: bool,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Series tail tolerance.
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    /// Term budget per Bessel series.
    #[arg(long, default_value_t = 1000)]
    pub max_terms: usize,
}

#[derive(Debug, Args)]
pub struct MaxArgs {
    #[command(flatten)]
    pub motion: Motion,
    #[arg(long, value_enum)]
    pub v0: V0Arg,
    #[command(flatten)]
    pub cond: CondChoice,
    #[command(flatten)]
    pub beta: BetaChoice,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PointMassArgs {
    #[command(flatten)]
    pub motion: Motion,
    #[arg(long, value_enum)]
    pub v0: V0Arg,
    /// Condition on N reversals; otherwise unconditional.
    #[arg(long, value_name = "N")]
    pub count: Option<u32>,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PositionArgs {
    #[command(flatten)]
    pub motion: Motion,
    /// Initial velocity; equiprobable when omitted.
    #[arg(long, value_enum)]
    pub v0: Option<V0Arg>,
    /// Condition on N reversals; otherwise unconditional.
    #[arg(long, value_name = "N")]
    pub count: Option<u32>,
    #[command(flatten)]
    pub x: XChoice,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct NonhomArgs {
    #[command(flatten)]
    pub motion: Motion,
    /// Rate multiplier: reversals occur at rate alpha / t.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub x: XChoice,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TriangleArgs {
    #[arg(long)]
    pub k: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    G,
    H,
    K,
    Telegraph,
    Nonhom,
}

#[derive(Debug, Args)]
pub struct EpdArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub motion: Motion,
    /// Exponent of (c1 t - x).
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    /// Exponent of (c2 t + x).
    #[arg(long, default_value_t = 2.0)]
    pub n: f64,
    /// Extra power of t for the K family.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Rate multiplier for the non-homogeneous family.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Interior point.
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    /// Coarsest step.
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    /// Number of halvings.
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub motion: Motion,
    #[arg(long, value_enum)]
    pub v0: V0Arg,
    /// Exactly N reversals at uniform order statistics.
    #[arg(long, value_name = "N", conflicts_with = "alpha")]
    pub count: Option<u32>,
    /// Reversal rate alpha / s instead of lambda.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Start of the alpha / s clock as a fraction of t.
    #[arg(long, default_value_t = telemax::simulate::DEFAULT_EPD_EPSILON, requires = "alpha")]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report the empirical CDF of the maximum on these thresholds instead of raw paths.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "beta-grid", value_parser = parse_grid, value_name = "A:B:N", conflicts_with = "beta")]
    pub beta_grid: Option<Grid>,
    #[command(flatten)]
    pub output: Output,
}

impl SampleArgs {
    pub fn thresholds(&self) -> Option<Vec<f64>> {
        if self.beta.is_none() && self.beta_grid.is_none() {
            None
        } else {
            Some(points(self.beta, &self.beta_grid))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Oracle,
    Conditional,
    Atoms,
    Triangle,
    Unconditional,
    Normalization,
    Epd,
    Symmetric,
    Argmax,
}

impl SuiteArg {
    pub fn suites(self) -> Vec<Suite> {
        let one = match self {
            SuiteArg::All => return Suite::ALL.to_vec(),
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Conditional => Suite::Conditional,
            SuiteArg::Atoms => Suite::Atoms,
            SuiteArg::Triangle => Suite::Triangle,
            SuiteArg::Unconditional => Suite::Unconditional,
            SuiteArg::Normalization => Suite::Normalization,
            SuiteArg::Epd => Suite::Epd,
            SuiteArg::Symmetric => Suite::Symmetric,
            SuiteArg::Argmax => Suite::Argmax,
        };
        vec![one]
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}
