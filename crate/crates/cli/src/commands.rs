//! Subcommand implementations. Each returns a table in grid order.

use rayon::prelude::*;
use telemax::epd::{epd_residual, EpdFamily, EpdSpec, GridSpec};
use telemax::max_law::{a_triangle, max_cdf, max_pdf, max_point_mass_plus, zero_mass_count, zero_mass_unconditional};
use telemax::position::{nonhomogeneous_position_pdf, position_pdf, position_pdf_given_count};
use telemax::simulate::{empirical_max_cdf, MonteCarlo, PathLaw};
use telemax::validation::{run_suites, SuiteConfig};
use telemax::{Conditioning, InitialVelocity, LawValue, MaxQuery, MotionParams, SeriesConfig};

use crate::args::{
    EpdArgs, FamilyArg, MaxArgs, Motion, NonhomArgs, PointMassArgs, PositionArgs, SampleArgs, SeriesArgs, TriangleArgs,
    ValidateArgs,
};
use crate::output::{Cell, Table};
use crate::AppError;

/// A finished command: its table and whether the checks it ran passed.
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, passed: true }
    }
}

fn need_lambda(m: &Motion, what: &str) -> Result<f64, AppError> {
    m.lambda
        .ok_or_else(|| AppError::Usage(format!("--lambda is required for {what}")))
}

fn params(m: &Motion, lambda: f64) -> Result<MotionParams, AppError> {
    Ok(MotionParams::new(m.c1, m.c2, lambda)?)
}

fn series(a: &SeriesArgs) -> Result<SeriesConfig, AppError> {
    Ok(SeriesConfig::new(a.tol, a.max_terms)?)
}

fn cond_label(count: Option<u32>) -> String {
    count.map_or_else(|| "unconditional".to_string(), |n| format!("n={n}"))
}

fn motion_cells(m: &Motion) -> Vec<Cell> {
    vec![m.c1.into(), m.c2.into(), m.lambda.into(), m.t.into()]
}

fn law_cells(v: LawValue) -> [Cell; 2] {
    [v.value.into(), v.abs_error_bound.into()]
}

fn evaluate<F>(points: &[f64], f: F) -> Result<Vec<LawValue>, AppError>
where
    F: Fn(f64) -> telemax::Result<LawValue> + Sync,
{
    Ok(points.par_iter().map(|&x| f(x)).collect::<telemax::Result<Vec<_>>>()?)
}

pub fn max_law(a: &MaxArgs, density: bool) -> Result<Outcome, AppError> {
    let (cond, lambda) = match a.cond.count {
        Some(n) => (Conditioning::GivenCount(n), a.motion.lambda.unwrap_or(0.0)),
        None => (
            Conditioning::Unconditional,
            need_lambda(&a.motion, "unconditional laws")?,
        ),
    };
    let p = params(&a.motion, lambda)?;
    let cfg = series(&a.series)?;
    let v0: InitialVelocity = a.v0.into();
    let betas = a.beta.points();
    let vals = evaluate(&betas, |beta| {
        let q = MaxQuery {
            t: a.motion.t,
            beta,
            v0,
            cond,
        };
        if density {
            max_pdf(&p, &q)
        } else {
            max_cdf(&p, &q, &cfg)
        }
    })?;
    let mut table = Table::new(&[
        "c1",
        "c2",
        "lambda",
        "t",
        "v0",
        "cond",
        "beta",
        "value",
        "abs_error_bound",
    ]);
    for (beta, v) in betas.iter().zip(vals) {
        let mut row = motion_cells(&a.motion);
        row.extend([v0.as_str().into(), cond_label(a.cond.count).into(), (*beta).into()]);
        row.extend(law_cells(v));
        table.push(row);
    }
    Ok(table.into())
}

pub fn point_mass(a: &PointMassArgs) -> Result<Outcome, AppError> {
    let v0: InitialVelocity = a.v0.into();
    let t = a.motion.t;
    let (value, location) = match (v0, a.count) {
        (InitialVelocity::Plus, Some(n)) => {
            let p = params(&a.motion, a.motion.lambda.unwrap_or(0.0))?;
            if n == 0 {
                return Err(telemax::TelemaxError::Domain("reversal count must be at least 1".into()).into());
            }
            // Any reversal keeps the path strictly below c1 t.
            (LawValue::exact(0.0), p.c1() * t)
        }
        (InitialVelocity::Plus, None) => {
            let p = params(&a.motion, need_lambda(&a.motion, "the unconditional point mass")?)?;
            (max_point_mass_plus(&p, t)?, p.c1() * t)
        }
        (InitialVelocity::Minus, Some(n)) => {
            let p = params(&a.motion, a.motion.lambda.unwrap_or(0.0))?;
            (zero_mass_count(&p, n)?, 0.0)
        }
        (InitialVelocity::Minus, None) => {
            let p = params(&a.motion, need_lambda(&a.motion, "the unconditional point mass")?)?;
            (zero_mass_unconditional(&p, t, &series(&a.series)?)?, 0.0)
        }
    };
    let mut table = Table::new(&[
        "c1",
        "c2",
        "lambda",
        "t",
        "v0",
        "cond",
        "location",
        "value",
        "abs_error_bound",
    ]);
    let mut row = motion_cells(&a.motion);
    row.extend([v0.as_str().into(), cond_label(a.count).into(), location.into()]);
    row.extend(law_cells(value));
    table.push(row);
    Ok(table.into())
}

pub fn position(a: &PositionArgs) -> Result<Outcome, AppError> {
    let xs = a.x.points();
    let t = a.motion.t;
    let v0: Option<InitialVelocity> = a.v0.map(Into::into);
    let vals = match a.count {
        Some(n) => {
            let p = params(&a.motion, a.motion.lambda.unwrap_or(0.0))?;
            evaluate(&xs, |x| position_pdf_given_count(&p, t, x, n, v0))?
        }
        None => {
            if v0.is_some() {
                return Err(AppError::Usage(
                    "the unconditional position density averages over the initial velocity; drop --v0".into(),
                ));
            }
            let p = params(&a.motion, need_lambda(&a.motion, "the unconditional position density")?)?;
            let cfg = series(&a.series)?;
            evaluate(&xs, |x| position_pdf(&p, t, x, &cfg))?
        }
    };
    let mut table = Table::new(&["c1", "c2", "lambda", "t", "v0", "cond", "x", "value", "abs_error_bound"]);
    for (x, v) in xs.iter().zip(vals) {
        let mut row = motion_cells(&a.motion);
        row.extend([
            v0.map_or("random", InitialVelocity::as_str).into(),
            cond_label(a.count).into(),
            (*x).into(),
        ]);
        row.extend(law_cells(v));
        table.push(row);
    }
    Ok(table.into())
}

pub fn nonhom(a: &NonhomArgs) -> Result<Outcome, AppError> {
    let p = params(&a.motion, 0.0)?;
    let xs = a.x.points();
    let vals = evaluate(&xs, |x| nonhomogeneous_position_pdf(&p, a.alpha, a.motion.t, x))?;
    let mut table = Table::new(&["c1", "c2", "alpha", "t", "x", "value", "abs_error_bound"]);
    for (x, v) in xs.iter().zip(vals) {
        let mut row = vec![
            a.motion.c1.into(),
            a.motion.c2.into(),
            a.alpha.into(),
            a.motion.t.into(),
            (*x).into(),
        ];
        row.extend(law_cells(v));
        table.push(row);
    }
    Ok(table.into())
}

/// The row, as exact integers.
pub fn triangle(a: &TriangleArgs) -> Result<Vec<u128>, AppError> {
    Ok(a_triangle(a.k)?)
}

pub fn epd(a: &EpdArgs) -> Result<Outcome, AppError> {
    let family = match a.family {
        FamilyArg::G => EpdFamily::G,
        FamilyArg::H => EpdFamily::H,
        FamilyArg::K => EpdFamily::K,
        FamilyArg::Telegraph => EpdFamily::TelegraphP,
        FamilyArg::Nonhom => EpdFamily::NonHom {
            alpha: a
                .alpha
                .ok_or_else(|| AppError::Usage("--alpha is required for the nonhom family".into()))?,
        },
    };
    let lambda = if a.family == FamilyArg::Telegraph {
        need_lambda(&a.motion, "the telegraph family")?
    } else {
        a.motion.lambda.unwrap_or(0.0)
    };
    let p = params(&a.motion, lambda)?;
    let spec = EpdSpec::new(a.m, a.n, a.r, family)?;
    let grid = GridSpec {
        x0: a.x,
        t0: a.motion.t,
        h: a.h,
        levels: a.levels,
    };
    let rep = epd_residual(&spec, &p, &grid)?;
    let mut table = Table::new(&["level", "h", "residual", "floor", "at_floor", "ratio"]);
    for (i, l) in rep.levels.iter().enumerate() {
        let ratio = i.checked_sub(1).map(|j| rep.ratios[j]);
        table.push(vec![
            i.into(),
            l.h.into(),
            l.residual.into(),
            l.floor.into(),
            l.at_floor().into(),
            ratio.into(),
        ]);
    }
    Ok(Outcome {
        table,
        passed: rep.is_second_order(),
    })
}

pub fn sample(a: &SampleArgs) -> Result<Outcome, AppError> {
    let (law, lambda) = match (a.count, a.alpha) {
        (Some(n), _) => (PathLaw::GivenCount { n }, a.motion.lambda.unwrap_or(0.0)),
        (None, Some(alpha)) => (
            PathLaw::EpdRate {
                alpha,
                epsilon: a.epsilon,
            },
            0.0,
        ),
        (None, None) => (PathLaw::Homogeneous, need_lambda(&a.motion, "homogeneous sampling")?),
    };
    let mc = MonteCarlo {
        params: params(&a.motion, lambda)?,
        t: a.motion.t,
        v0: a.v0.into(),
        law,
        seed: a.seed,
    };
    let paths = mc.summaries(a.samples)?;
    match a.thresholds() {
        None => {
            let mut table = Table::new(&["path", "realized_max", "endpoint", "switches"]);
            for (i, s) in paths.iter().enumerate() {
                table.push(vec![
                    i.into(),
                    s.realized_max.into(),
                    s.endpoint.into(),
                    s.switches.into(),
                ]);
            }
            Ok(table.into())
        }
        Some(grid) => {
            let pts = empirical_max_cdf(&paths, &grid)?;
            let mut table = Table::new(&["beta", "below", "at_most", "se_below", "se_at_most", "samples"]);
            for e in pts {
                table.push(vec![
                    e.beta.into(),
                    e.below.into(),
                    e.at_most.into(),
                    e.se_below.into(),
                    e.se_at_most.into(),
                    paths.len().into(),
                ]);
            }
            Ok(table.into())
        }
    }
}

pub fn validate(a: &ValidateArgs) -> Result<Outcome, AppError> {
    let cfg = SuiteConfig {
        seed: a.seed,
        samples: a.samples,
    };
    let rep = run_suites(&a.suite.suites(), &cfg)?;
    let mut table = Table::new(&["suite", "check", "observed", "tolerance", "pass"]);
    for c in &rep.checks {
        table.push(vec![
            c.suite.as_str().into(),
            c.name.clone().into(),
            c.observed.into(),
            c.tolerance.into(),
            c.pass.into(),
        ]);
    }
    let failed = rep.checks.iter().filter(|c| !c.pass).count();
    eprintln!("{} of {} checks passed", rep.checks.len() - failed, rep.checks.len());
    Ok(Outcome {
        table,
        passed: rep.passed(),
    })
}
