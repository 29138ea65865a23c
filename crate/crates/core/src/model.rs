//! Parameters and query types shared by every law evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Velocities and reversal rate of the asymmetric telegraph process.
///
/// The particle moves right with speed `c1`, left with speed `c2`, and
/// reverses at the events of a Poisson process with rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMotionParams")]
pub struct MotionParams {
    c1: f64,
    c2: f64,
    lambda: f64,
}

#[derive(Deserialize)]
struct RawMotionParams {
    c1: f64,
    c2: f64,
    lambda: f64,
}

impl TryFrom<RawMotionParams> for MotionParams {
    type Error = crate::TelemaxError;
    fn try_from(r: RawMotionParams) -> Result<Self> {
        Self::new(r.c1, r.c2, r.lambda)
    }
}

impl MotionParams {
    pub fn new(c1: f64, c2: f64, lambda: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) {
            return domain(format!("c1 must be positive and finite, got {c1}"));
        }
        if !(c2 > 0.0 && c2.is_finite()) {
            return domain(format!("c2 must be positive and finite, got {c2}"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("lambda must be nonnegative and finite, got {lambda}"));
        }
        Ok(Self { c1, c2, lambda })
    }

    /// Symmetric process with common speed `c`.
    pub fn symmetric(c: f64, lambda: f64) -> Result<Self> {
        Self::new(c, c, lambda)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The ratio `c1 / c2`. Atom probabilities depend on the speeds only through it.
    pub fn velocity_ratio(&self) -> f64 {
        self.c1 / self.c2
    }

    /// Same speeds, different rate.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.c1, self.c2, lambda)
    }

    pub fn is_symmetric(&self) -> bool {
        self.c1 == self.c2
    }

    /// Support of the position at time `t`: `[-c2 t, c1 t]`.
    pub fn support(&self, t: f64) -> (f64, f64) {
        (-self.c2 * t, self.c1 * t)
    }
}

/// Initial velocity `V(0)`: `Plus` is `+c1`, `Minus` is `-c2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialVelocity {
    Plus,
    Minus,
}

impl InitialVelocity {
    pub fn flipped(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }

    /// Signed speed for this direction.
    pub fn speed(self, p: &MotionParams) -> f64 {
        match self {
            Self::Plus => p.c1(),
            Self::Minus => -p.c2(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
        }
    }
}

/// Conditioning on the number of reversals in `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    GivenCount(u32),
    Unconditional,
}

/// A point query for the law of the running maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxQuery {
    pub t: f64,
    pub beta: f64,
    pub v0: InitialVelocity,
    pub cond: Conditioning,
}

impl MaxQuery {
    /// Checks `t > 0`, `beta` inside `[0, c1 t]` and `n >= 1` for count conditioning.
    pub fn validate(&self, p: &MotionParams) -> Result<()> {
        check_horizon(self.t)?;
        check_beta(p, self.t, self.beta)?;
        if let Conditioning::GivenCount(0) = self.cond {
            return domain("reversal count must be at least 1");
        }
        Ok(())
    }
}

/// A probability or density value together with a bound on its truncation error.
///
/// CDF conventions: laws with `V(0) = +c1` are reported as `P{max < beta}`, so
/// the atom at `beta = c1 t` is excluded. Laws with `V(0) = -c2` are reported as
/// `P{max <= beta}`, so the atom at `beta = 0` is included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawValue {
    pub value: f64,
    pub abs_error_bound: f64,
}

impl LawValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error_bound: 0.0,
        }
    }

    pub fn with_bound(value: f64, abs_error_bound: f64) -> Self {
        Self { value, abs_error_bound }
    }
}

pub(crate) fn check_horizon(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("time horizon must be positive and finite, got {t}"));
    }
    Ok(())
}

pub(crate) fn check_beta(p: &MotionParams, t: f64, beta: f64) -> Result<()> {
    let top = p.c1() * t;
    if !(0.0..=top).contains(&beta) {
        return domain(format!("beta = {beta} outside the support [0, {top}]"));
    }
    Ok(())
}

pub(crate) fn check_count(n: u32) -> Result<()> {
    if n == 0 {
        return domain("reversal count must be at least 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(MotionParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MotionParams::new(1.0, -1.0, 1.0).is_err());
        assert!(MotionParams::new(1.0, 1.0, -0.1).is_err());
        assert!(MotionParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(MotionParams::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn query_validation() {
        let p = MotionParams::new(2.0, 1.0, 1.0).unwrap();
        let mut q = MaxQuery {
            t: 1.0,
            beta: 2.0,
            v0: InitialVelocity::Plus,
            cond: Conditioning::GivenCount(1),
        };
        assert!(q.validate(&p).is_ok());
        q.beta = 2.0 + 1e-12;
        assert!(q.validate(&p).is_err());
        q.beta = 1.0;
        q.cond = Conditioning::GivenCount(0);
        assert!(q.validate(&p).is_err());
        q.cond = Conditioning::Unconditional;
        q.t = 0.0;
        assert!(q.validate(&p).is_err());
    }

    #[test]
    fn ratio_is_derived() {
        let p = MotionParams::new(3.0, 1.5, 0.0).unwrap();
        assert_eq!(p.velocity_ratio(), 2.0);
        assert_eq!(p.support(2.0), (-3.0, 6.0));
    }
}
