use rug::Rational;

use crate::binomial::{tail_prob, tail_probs, ExactDyadic};
use crate::error::{Error, Result};
use crate::gaussian::q_inv;
use crate::numerics::{refine_until, Enclosure, Real};
use crate::rate::{default_tolerance, f_inv, f_max};

/// Extra bits carried through the inversion chain; `m * b` cancels up to
/// `log2 m` of them against `2k - m - 1`.
const DELTA_GUARD_BITS: u32 = 24;

/// One evaluated conjecture point.
#[derive(Clone, Debug)]
pub struct DeltaRecord {
    pub m: u32,
    pub k: u32,
    /// `p_{k,m} = P(X_m >= 2k - m)`.
    pub p: ExactDyadic,
    /// `Q^-1(p) / sqrt(m)`.
    pub y: Real,
    /// `f^-1(y)`.
    pub b: Real,
    /// `10 (2k - m - 1 - m b)`.
    pub delta: Real,
}

pub(crate) fn check_even_index(m: u32, k: u32) -> Result<()> {
    if m == 0 || m % 2 != 0 || 2 * k <= m || k > m {
        return Err(Error::IndexOutOfRange { m, k: i64::from(k) });
    }
    Ok(())
}

/// `Delta_{k,m}` for even `m` and `m/2 < k <= m`.
pub fn delta(m: u32, k: u32, prec: u32) -> Result<DeltaRecord> {
    check_even_index(m, k)?;
    let p = tail_prob(m, i64::from(k))?;
    delta_from_tail(m, k, p, prec)
}

/// As [`delta`], with the exact tail already in hand.
pub fn delta_from_tail(m: u32, k: u32, p: ExactDyadic, prec: u32) -> Result<DeltaRecord> {
    check_even_index(m, k)?;
    let work = prec + DELTA_GUARD_BITS;
    let sqrt_m = Real::from_i64(i64::from(m), work).sqrt();
    let y = q_inv(&p, work)? / &sqrt_m;
    if y >= f_max(work) || !(y > 0.0) {
        return Err(Error::Range(format!(
            "y = {y} for (m, k) = ({m}, {k}) is outside (0, sqrt(ln 4))"
        )));
    }
    let b = f_inv(&y, work, &default_tolerance(work))?;
    let centre = 2 * i64::from(k) - i64::from(m) - 1;
    let delta = (Real::from_i64(centre, work) - b.clone() * i64::from(m)) * 10;
    Ok(DeltaRecord {
        m,
        k,
        p,
        y: y.with_prec(prec),
        b: b.with_prec(prec),
        delta: delta.with_prec(prec),
    })
}

/// Records for every valid `k` at one `m`, increasing `k`.
pub fn deltas_for(m: u32, prec: u32) -> Result<Vec<DeltaRecord>> {
    tail_probs(m)?
        .into_iter()
        .map(|(k, p)| delta_from_tail(m, k, p, prec))
        .collect()
}

/// Upper end of the conjectured range `0 < Delta < 1.036`.
pub fn delta_upper_bound() -> Rational {
    Rational::from((1036, 1000))
}

/// Constant in the sharpened step bound `|Psi_m(Y) - m f^-1(Y/m)| < 1.1036`.
pub fn sharp_step_bound() -> Rational {
    Rational::from((11036, 10000))
}

/// Whether a certified claim holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    /// Enclosures still straddled a bound at the maximum precision.
    Undecidable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Undecidable => "undecidable",
        }
    }

    /// Worst of two verdicts: a failure dominates undecidability.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (Undecidable, _) | (_, Undecidable) => Undecidable,
            _ => Holds,
        }
    }
}

/// Outcome of a two-sided certified check `lower < value < upper`.
#[derive(Clone, Debug)]
pub struct CertifiedResult {
    pub verdict: Verdict,
    /// Precision at which the verdict was reached.
    pub precision: u32,
    /// Certified distance to the lower bound (lower end of the enclosure
    /// minus the bound); negative when the claim fails on that side.
    pub lower_margin: Real,
    /// Certified distance to the upper bound.
    pub upper_margin: Real,
    /// Centre of the final enclosure of the checked quantity.
    pub value: Real,
}

impl CertifiedResult {
    pub fn min_margin(&self) -> Real {
        self.lower_margin.clone().min(self.upper_margin.clone())
    }

    /// Certified, but with less than `threshold` to spare on some side.
    pub fn is_tight(&self, threshold: f64) -> bool {
        self.verdict == Verdict::Holds && self.min_margin() < threshold
    }
}

/// Margin below which a certified result is reported as tight.
pub const TIGHT_MARGIN: f64 = 0.05;

/// Classifies an enclosure against `lower < value < upper`.
pub(crate) fn classify(
    enc: &Enclosure,
    lower: &Rational,
    upper: &Rational,
) -> (Verdict, Real, Real) {
    let prec = enc.mid.prec();
    let lo = enc.lo();
    let hi = enc.hi();
    let lower_margin = &lo - &Real::from_rational(lower, prec);
    let upper_margin = &Real::from_rational(upper, prec) - &hi;
    let verdict = if *lo.as_float() > *lower && *hi.as_float() < *upper {
        Verdict::Holds
    } else if *hi.as_float() <= *lower || *lo.as_float() >= *upper {
        Verdict::Fails
    } else {
        Verdict::Undecidable
    };
    (verdict, lower_margin, upper_margin)
}

/// Runs the precision ladder on `expr` until it certifies or refutes
/// `lower < value < upper`.
pub(crate) fn certify_between<F>(
    expr: F,
    lower: &Rational,
    upper: &Rational,
    start: u32,
    max: u32,
) -> Result<CertifiedResult>
where
    F: Fn(u32) -> Result<Real>,
{
    let mut last: Option<CertifiedResult> = None;
    let outcome = refine_until(expr, start, max, |enc| {
        let (verdict, lower_margin, upper_margin) = classify(enc, lower, upper);
        let result = CertifiedResult {
            verdict,
            precision: enc.precision,
            lower_margin,
            upper_margin,
            value: enc.mid.clone(),
        };
        if verdict == Verdict::Undecidable {
            last = Some(result);
            None
        } else {
            Some(result)
        }
    })?;
    match outcome {
        Ok(result) => Ok(result),
        Err(reached) => {
            let mut result = last.ok_or(Error::InvalidPrecision(start))?;
            result.precision = reached;
            Ok(result)
        }
    }
}

/// Certifies `lower < Delta_{k,m} < upper` (normally `0` and `1.036`).
pub fn check_sharp_with_bounds(
    m: u32,
    k: u32,
    p: &ExactDyadic,
    lower: &Rational,
    upper: &Rational,
    start: u32,
    max: u32,
) -> Result<CertifiedResult> {
    certify_between(
        |prec| Ok(delta_from_tail(m, k, p.clone(), prec)?.delta),
        lower,
        upper,
        start,
        max,
    )
}

/// Certifies `0 < Delta_{k,m} < 1.036`, starting at `start` bits and
/// doubling up to `max`.
pub fn check_sharp(m: u32, k: u32, start: u32, max: u32) -> Result<CertifiedResult> {
    check_even_index(m, k)?;
    let p = tail_prob(m, i64::from(k))?;
    check_sharp_with_bounds(m, k, &p, &Rational::new(), &delta_upper_bound(), start, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let d = delta(2, 2, 128).unwrap();
        assert!((d.y.to_f64() - 0.476_936_276_204_469_87).abs() < 1e-15);
        assert!((d.b.to_f64() - 0.467_658_101_298_313_6).abs() < 1e-15);
        assert!((d.delta.to_f64() - 0.646_837_974_033_727_2).abs() < 1e-14);
        let d = delta(4, 4, 128).unwrap();
        assert!((d.delta.to_f64() - 0.937_256_589_535_694_4).abs() < 1e-14);
        let d = delta(10, 10, 128).unwrap();
        assert!((d.delta.to_f64() - 1.035_972_832_221_012_7).abs() < 1e-14);
        let d = delta(6, 4, 128).unwrap();
        assert!((d.delta.to_f64() - 0.169_133_815_745_846_77).abs() < 1e-14);
    }

    #[test]
    fn index_errors() {
        for (m, k) in [(2, 1), (4, 5), (3, 2), (0, 0)] {
            assert!(matches!(
                delta(m, k, 128),
                Err(Error::IndexOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn precision_agreement() {
        let a = delta(40, 31, 128).unwrap().delta;
        let b = delta(40, 31, 512).unwrap().delta;
        assert!((a - b.with_prec(128)).abs() < Real::pow2(-110, 128));
    }

    #[test]
    fn sharp_checks() {
        let r = check_sharp(2, 2, 128, 4096).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.precision, 128);
        assert!((r.lower_margin.to_f64() - 0.6468).abs() < 1e-3);
        assert!((r.upper_margin.to_f64() - 0.3892).abs() < 1e-3);
        let r = check_sharp(10, 10, 128, 4096).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.upper_margin < 0.04 && r.upper_margin > 0.0);
        assert!(r.is_tight(TIGHT_MARGIN));
        assert_eq!(
            check_sharp(6, 4, 128, 4096).unwrap().verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn lowered_bound_is_a_certified_failure() {
        let p = tail_prob(10, 10).unwrap();
        let r = check_sharp_with_bounds(
            10,
            10,
            &p,
            &Rational::new(),
            &Rational::from((1035, 1000)),
            128,
            4096,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        // A bound placed inside the enclosure can never be decided.
        let exact = Rational::from(delta(10, 10, 256).unwrap().delta.to_rational().unwrap());
        let r = check_sharp_with_bounds(10, 10, &p, &Rational::new(), &exact, 64, 256).unwrap();
        assert_eq!(r.verdict, Verdict::Undecidable);
        assert_eq!(r.precision, 256);
    }

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Holds.combine(Holds), Holds);
        assert_eq!(Holds.combine(Undecidable), Undecidable);
        assert_eq!(Undecidable.combine(Fails), Fails);
    }
}
