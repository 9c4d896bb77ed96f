use crate::binomial::{tail_abscissa, tail_prob, ExactDyadic};
use crate::error::Result;
use crate::gaussian::log_q;
use crate::numerics::{refine_until, Real};
use crate::rate::f_eval;

use super::delta::{check_even_index, CertifiedResult, Verdict};

/// `ln Q(sqrt(m) f(x_{j,m}))` at `prec` bits.
fn log_q_at_abscissa(m: u32, j: u32, prec: u32) -> Result<Real> {
    let work = prec + 16;
    let x = Real::from_rational(&tail_abscissa(m, j), work);
    let z = f_eval(&x, work)? * &Real::from_i64(i64::from(m), work).sqrt();
    Ok(log_q(&z, work)?.with_prec(prec))
}

/// Certifies `expr > 0` by doubling precision. Returns the verdict, the
/// precision reached and the certified lower end of the final enclosure.
fn certify_positive<F>(expr: F, start: u32, max: u32) -> Result<(Verdict, u32, Real)>
where
    F: Fn(u32) -> Result<Real>,
{
    let mut last = None;
    let outcome = refine_until(expr, start, max, |enc| {
        let lo = enc.lo();
        if lo > 0.0 {
            Some((Verdict::Holds, enc.precision, lo))
        } else if enc.hi() < 0.0 {
            Some((Verdict::Fails, enc.precision, lo))
        } else {
            last = Some(lo);
            None
        }
    })?;
    Ok(match outcome {
        Ok(done) => done,
        Err(reached) => (
            Verdict::Undecidable,
            reached,
            last.unwrap_or_else(|| Real::zero(start)),
        ),
    })
}

/// Certifies `Q(sqrt(m) f(x_{k,m})) < p_{k,m} < Q(sqrt(m) f(x_{k-1,m}))`.
///
/// Both sides are compared in the log domain. The margins are the
/// certified lower bounds of `ln p - ln Q(left)` and `ln Q(right) - ln p`;
/// `value` holds `ln p`.
pub fn check_weak(m: u32, k: u32, start: u32, max: u32) -> Result<CertifiedResult> {
    check_even_index(m, k)?;
    let p = tail_prob(m, i64::from(k))?;
    check_weak_with_tail(m, k, &p, start, max)
}

pub fn check_weak_with_tail(
    m: u32,
    k: u32,
    p: &ExactDyadic,
    start: u32,
    max: u32,
) -> Result<CertifiedResult> {
    check_even_index(m, k)?;
    let (left, left_prec, lower_margin) = certify_positive(
        |prec| Ok(p.ln(prec)? - log_q_at_abscissa(m, k, prec)?),
        start,
        max,
    )?;

    let (right, right_prec, upper_margin) = if 2 * (k - 1) == m {
        // Q(0) = 1/2: an exact comparison.
        let half = ExactDyadic::half();
        let verdict = if *p < half {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        let margin = half.ln(start)? - p.ln(start)?;
        (verdict, start, margin)
    } else {
        certify_positive(
            |prec| Ok(log_q_at_abscissa(m, k - 1, prec)? - p.ln(prec)?),
            start,
            max,
        )?
    };

    Ok(CertifiedResult {
        verdict: left.combine(right),
        precision: left_prec.max(right_prec),
        lower_margin,
        upper_margin,
        value: p.ln(start)?,
    })
}
