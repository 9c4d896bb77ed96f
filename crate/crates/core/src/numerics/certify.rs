//! Enclosures and certified comparison of real expressions.
//!
//! An expression is anything that can be evaluated at a requested
//! precision. Its enclosure at precision P is centred on the value at 2P
//! with radius `|v(P) - v(2P)| + |v(2P)| * 2^(2-P)`: the first term
//! measures the error actually committed at P, the second absorbs the
//! rounding left in the 2P value. This is a heuristic bound and not
//! interval arithmetic; it is sound for the smooth compositions of
//! correctly rounded elementary functions used in this crate.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::Real;

/// Outcome of [`certified_compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareOutcome {
    Less,
    Greater,
    /// Enclosures still overlapped at this precision.
    Undecidable(u32),
}

impl CompareOutcome {
    pub fn is_decided(&self) -> bool {
        !matches!(self, CompareOutcome::Undecidable(_))
    }
}

/// A closed interval `[lo, hi]` believed to contain an exact value.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub mid: Real,
    pub radius: Real,
    /// Precision P of the coarser of the two evaluations.
    pub precision: u32,
}

impl Enclosure {
    /// An exact value, zero radius.
    pub fn exact(value: Real) -> Self {
        let precision = value.prec();
        Enclosure {
            radius: Real::zero(precision),
            mid: value,
            precision,
        }
    }

    /// Builds the enclosure from evaluations at P (`coarse`) and 2P (`fine`).
    pub fn from_pair(coarse: &Real, fine: &Real, precision: u32) -> Self {
        let slack = fine.abs().mul_pow2(2 - precision as i32);
        let radius = (coarse - fine).abs() + slack;
        Enclosure {
            mid: fine.clone(),
            radius,
            precision,
        }
    }

    pub fn lo(&self) -> Real {
        &self.mid - &self.radius
    }

    pub fn hi(&self) -> Real {
        &self.mid + &self.radius
    }

    pub fn width(&self) -> Real {
        self.radius.mul_pow2(1)
    }

    /// `Some(Less)` when entirely below `other`, `Some(Greater)` when
    /// entirely above, `None` when the two intersect.
    pub fn compare(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi() < other.lo() {
            Some(Ordering::Less)
        } else if self.lo() > other.hi() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn contains(&self, x: &Real) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }
}

/// Evaluates `expr` at `prec` and `2 * prec` and returns the enclosure.
pub fn enclose<F>(expr: F, prec: u32) -> Result<Enclosure>
where
    F: Fn(u32) -> Result<Real>,
{
    let coarse = evaluate(&expr, prec)?;
    let fine = evaluate(&expr, 2 * prec)?;
    Ok(Enclosure::from_pair(&coarse, &fine, prec))
}

fn evaluate<F>(expr: &F, prec: u32) -> Result<Real>
where
    F: Fn(u32) -> Result<Real>,
{
    let v = expr(prec).map_err(|e| match e {
        Error::EvaluationFailure { .. } => e,
        other => Error::EvaluationFailure {
            precision: prec,
            reason: other.to_string(),
        },
    })?;
    if !v.is_finite() {
        return Err(Error::EvaluationFailure {
            precision: prec,
            reason: "non-finite value".into(),
        });
    }
    Ok(v)
}

/// Precisions visited by the doubling schedule, `start, 2*start, ...`,
/// never exceeding `max`.
pub fn precision_ladder(start: u32, max: u32) -> impl Iterator<Item = u32> {
    std::iter::successors(Some(start), move |&p| p.checked_mul(2)).take_while(move |&p| p <= max)
}

/// Drives the doubling schedule with caching: `step(P, v(P), v(2P))`
/// decides or asks for more precision by returning `None`. The 2P value
/// of one round is reused as the P value of the next.
pub fn refine_until<F, D, T>(expr: F, start: u32, max: u32, mut decide: D) -> Result<Result<T, u32>>
where
    F: Fn(u32) -> Result<Real>,
    D: FnMut(&Enclosure) -> Option<T>,
{
    let mut reached = start;
    let mut cached: Option<Real> = None;
    for prec in precision_ladder(start, max) {
        reached = prec;
        let coarse = match cached.take() {
            Some(v) => v,
            None => evaluate(&expr, prec)?,
        };
        let fine = evaluate(&expr, 2 * prec)?;
        let enc = Enclosure::from_pair(&coarse, &fine, prec);
        if let Some(out) = decide(&enc) {
            return Ok(Ok(out));
        }
        cached = Some(fine);
    }
    Ok(Err(reached))
}

/// Decides `a < b` or `a > b` by doubling precision from `start` until the
/// enclosures separate. Equal values never separate and end in
/// `Undecidable(max)`.
pub fn certified_compare<A, B>(a: A, b: B, start: u32, max: u32) -> Result<CompareOutcome>
where
    A: Fn(u32) -> Result<Real>,
    B: Fn(u32) -> Result<Real>,
{
    if start == 0 || start > max {
        return Err(Error::InvalidPrecision(start));
    }
    let mut cached: Option<(Real, Real)> = None;
    for prec in precision_ladder(start, max) {
        let (a_p, b_p) = match cached.take() {
            Some(pair) => pair,
            None => (evaluate(&a, prec)?, evaluate(&b, prec)?),
        };
        let a_2p = evaluate(&a, 2 * prec)?;
        let b_2p = evaluate(&b, 2 * prec)?;
        let ea = Enclosure::from_pair(&a_p, &a_2p, prec);
        let eb = Enclosure::from_pair(&b_p, &b_2p, prec);
        match ea.compare(&eb) {
            Some(Ordering::Less) => return Ok(CompareOutcome::Less),
            Some(Ordering::Greater) => return Ok(CompareOutcome::Greater),
            _ => cached = Some((a_2p, b_2p)),
        }
    }
    Ok(CompareOutcome::Undecidable(max))
}
