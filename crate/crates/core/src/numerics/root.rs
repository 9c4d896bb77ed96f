//! Bracketed root finding for monotone functions.
//!
//! The search keeps a bracket `[lo, hi]` on which the target changes sign
//! and proposes Newton steps when the caller supplies a slope, or
//! Illinois-modified false-position steps otherwise. A proposal outside
//! the live bracket, a Newton step longer than half the step taken two
//! iterations earlier, or two secant steps that fail to halve the bracket
//! fall back to bisection. Once a step is shorter than the tolerance the next
//! probe is placed just past the predicted root so the bracket collapses
//! onto it.

use crate::error::{Error, Result};
use crate::numerics::Real;

/// One evaluation of the target function.
#[derive(Clone, Debug)]
pub struct Sample {
    pub value: Real,
    /// Derivative at the same point, when cheaply available.
    pub slope: Option<Real>,
}

impl Sample {
    pub fn new(value: Real) -> Self {
        Sample { value, slope: None }
    }

    pub fn with_slope(value: Real, slope: Real) -> Self {
        Sample {
            value,
            slope: Some(slope),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RootResult {
    pub root: Real,
    pub bracket_lo: Real,
    pub bracket_hi: Real,
    pub iterations: usize,
}

impl RootResult {
    pub fn width(&self) -> Real {
        &self.bracket_hi - &self.bracket_lo
    }
}

/// Finds the root of a monotone `g` on `[lo, hi]` to within `tol`.
pub fn find_root_monotone<F>(
    g: F,
    lo: &Real,
    hi: &Real,
    tol: &Real,
    prec: u32,
) -> Result<RootResult>
where
    F: FnMut(&Real) -> Result<Sample>,
{
    RootSearch::new(lo, hi, tol, prec).run(g)
}

/// Configurable form of [`find_root_monotone`].
#[derive(Clone, Debug)]
pub struct RootSearch {
    lo: Real,
    hi: Real,
    tol: Real,
    prec: u32,
    guess: Option<Real>,
    known_signs: Option<(i32, i32)>,
    max_iterations: usize,
}

impl RootSearch {
    pub fn new(lo: &Real, hi: &Real, tol: &Real, prec: u32) -> Self {
        RootSearch {
            lo: lo.with_prec(prec),
            hi: hi.with_prec(prec),
            tol: tol.with_prec(prec),
            prec,
            guess: None,
            known_signs: None,
            max_iterations: 4 * prec as usize + 200,
        }
    }

    /// Starting point for the first Newton or secant step.
    pub fn guess(mut self, x: &Real) -> Self {
        self.guess = Some(x.with_prec(self.prec));
        self
    }

    /// Declares the signs of `g(lo)` and `g(hi)` (each -1 or 1), skipping
    /// the two endpoint evaluations. Only sound when the caller knows them
    /// analytically.
    pub fn endpoint_signs(mut self, at_lo: i32, at_hi: i32) -> Self {
        self.known_signs = Some((at_lo.signum(), at_hi.signum()));
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn run<F>(self, mut g: F) -> Result<RootResult>
    where
        F: FnMut(&Real) -> Result<Sample>,
    {
        let RootSearch {
            mut lo,
            mut hi,
            tol,
            prec: _,
            guess,
            known_signs,
            max_iterations,
        } = self;
        if lo >= hi {
            return Err(Error::InvalidBracket {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!(
                "root tolerance must be positive, got {tol}"
            )));
        }

        // Endpoint values; `None` when only the sign is known.
        let (mut f_lo, mut f_hi, sign_lo) = match known_signs {
            Some((s_lo, s_hi)) => {
                if s_lo == s_hi || s_lo == 0 {
                    return Err(Error::NoSignChange {
                        lo: lo.to_string(),
                        hi: hi.to_string(),
                    });
                }
                (None, None, s_lo)
            }
            None => {
                let a = g(&lo)?.value;
                if a.is_zero() {
                    return Ok(point_result(lo, 0));
                }
                let b = g(&hi)?.value;
                if b.is_zero() {
                    return Ok(point_result(hi, 0));
                }
                if a.sign() == b.sign() {
                    return Err(Error::NoSignChange {
                        lo: lo.to_string(),
                        hi: hi.to_string(),
                    });
                }
                let s = a.sign();
                (Some(a), Some(b), s)
            }
        };

        let half = |a: &Real, b: &Real| (a + b).mul_pow2(-1);
        let mut x = match guess {
            Some(x0) if x0 > lo && x0 < hi => x0,
            _ => half(&lo, &hi),
        };
        // Which end was replaced by the last two updates (Illinois rule).
        let mut last_side = 0i32;
        let mut widths = [&hi - &lo, &hi - &lo];
        // |step| of the previous two iterations, oldest first.
        let mut steps = [&hi - &lo, &hi - &lo];
        let mut best: Option<(Real, Real)> = None;
        let mut iterations = 0;

        while iterations < max_iterations && &hi - &lo > tol {
            iterations += 1;
            let sample = g(&x)?;
            let v = sample.value;
            if v.is_zero() {
                return Ok(point_result(x, iterations));
            }
            if best.as_ref().map_or(true, |(_, bv)| v.abs() < *bv) {
                best = Some((x.clone(), v.abs()));
            }
            let moved_lo = v.sign() == sign_lo;
            if moved_lo {
                lo = x.clone();
                f_lo = Some(v.clone());
                if last_side == -1 {
                    f_hi = f_hi.map(|f| f.mul_pow2(-1));
                }
                last_side = -1;
            } else {
                hi = x.clone();
                f_hi = Some(v.clone());
                if last_side == 1 {
                    f_lo = f_lo.map(|f| f.mul_pow2(-1));
                }
                last_side = 1;
            }
            let width = &hi - &lo;
            if width <= tol {
                break;
            }

            let mid = half(&lo, &hi);
            if mid <= lo || mid >= hi {
                // Bracket already at the resolution of `prec`.
                break;
            }

            let shrinking = width <= widths[0].mul_pow2(-1);
            widths = [widths[1].clone(), width];
            let proposal = match &sample.slope {
                Some(d) if !d.is_zero() && d.is_finite() => {
                    let step = &v / d;
                    // Steps below `tol` always pass, so a closing probe that
                    // lands on the same side is followed by another Newton step.
                    if step.abs().mul_pow2(1) > steps[0] && step.abs() >= tol {
                        None
                    } else {
                        Some(&x - &step)
                    }
                }
                _ => match (&f_lo, &f_hi) {
                    (Some(a), Some(b)) if a != b && shrinking => {
                        Some(&lo - &(&(a * &(&hi - &lo)) / &(b - a)))
                    }
                    _ => None,
                },
            };

            let inside = |t: &Real| *t > lo && *t < hi;
            let next = match proposal {
                Some(p) => {
                    let step = &p - &x;
                    if step.abs() < tol.mul_pow2(-1) {
                        // Converged: probe just beyond the prediction. The
                        // step may have rounded away entirely, leaving `p`
                        // on the bracket end.
                        let dir = if step.sign() != 0 {
                            step.sign()
                        } else if moved_lo {
                            1
                        } else {
                            -1
                        };
                        let nudge = tol.mul_pow2(-2);
                        let probe = if dir > 0 { &p + &nudge } else { &p - &nudge };
                        if inside(&probe) {
                            probe
                        } else if inside(&p) {
                            p
                        } else {
                            mid
                        }
                    } else if inside(&p) {
                        p
                    } else {
                        mid
                    }
                }
                None => mid,
            };
            steps = [steps[1].clone(), (&next - &x).abs()];
            x = next;
        }

        let root = match best {
            Some((bx, _)) if bx >= lo && bx <= hi => bx,
            _ => half(&lo, &hi),
        };
        Ok(RootResult {
            root,
            bracket_lo: lo,
            bracket_hi: hi,
            iterations,
        })
    }
}

fn point_result(x: Real, iterations: usize) -> RootResult {
    RootResult {
        root: x.clone(),
        bracket_lo: x.clone(),
        bracket_hi: x,
        iterations,
    }
}
