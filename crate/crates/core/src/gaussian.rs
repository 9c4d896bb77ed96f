//! Standard normal upper tail `Q(x) = P(Z > x)`, its logarithm and its
//! inverse, at arbitrary precision.
//!
//! Two evaluation regimes:
//!
//! * small `|x|`: `Q(x) = 1/2 - phi(x) * sum_{n>=0} x^(2n+1) / (2n+1)!!`.
//!   All terms are positive; the subtraction from 1/2 loses about
//!   `x^2 / (2 ln 2)` bits, which are added as guard bits.
//! * large `x`: `Q(x) = phi(x) * R(x)` with the Mills-ratio continued
//!   fraction `R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))`, evaluated by
//!   modified Lentz. Successive convergents straddle `R(x)`, so the last
//!   correction bounds the truncation error.
//!
//! The logarithm never forms `phi(x)` in the second regime, so `log_q` is
//! usable far past the point where `Q(x)` would underflow.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};

use rug::{Assign, Float, Rational};

use crate::binomial::ExactDyadic;
use crate::error::{Error, Result};
use crate::numerics::{Real, RootSearch, Sample};

const GUARD_BITS: u32 = 16;

/// `ln sqrt(2 pi)` at `prec` bits.
fn ln_sqrt_2pi(prec: u32) -> Real {
    (Real::pi(prec) * 2).ln().mul_pow2(-1)
}

/// Continued fraction is cheaper than the series once `2 x^2 >= bits * ln2`
/// (measured crossover between 64 and 528 bits).
fn continued_fraction_regime(x: &Real, work: u32) -> bool {
    let xf = x.to_f64().abs();
    2.0 * xf * xf >= f64::from(work) * LN_2
}

/// `sum_{n>=0} x^(2n+1) / (2n+1)!!` at `work` bits.
///
/// Terms only need enough bits to be accurate relative to the sum, so
/// their precision drops as they shrink.
fn odd_factorial_series(x: &Real, work: u32) -> Real {
    let x = Float::with_val(work, x.as_float());
    let x2 = Float::with_val(work, x.square_ref());
    let x2_f64 = x2.to_f64();
    let sum_exp = x.get_exp().unwrap_or(0);
    let mut term = x.clone();
    let mut sum = x;
    let mut n: u32 = 0;
    loop {
        n += 1;
        term *= &x2;
        term /= 2 * n + 1;
        sum += &term;
        let (te, se) = match (term.get_exp(), sum.get_exp()) {
            (Some(te), Some(se)) => (te, se),
            _ => break,
        };
        // Once the ratio x^2/(2n+3) is below 1/2 the rest is at most `term`.
        if x2_f64 < f64::from(2 * n + 3) / 2.0 && te - se < -(work as i32) - 4 {
            break;
        }
        let needed = (work as i32 + 8 - (sum_exp.max(se) - te)).max(32) as u32;
        if needed < term.prec() {
            term.set_prec(needed);
        }
    }
    Real::from_float(sum)
}

/// Mills ratio `R(x) = Q(x) / phi(x)` for `x > 0` by modified Lentz.
/// Returns `1 / R(x)`.
fn mills_denominator(x: &Real, work: u32) -> Real {
    let x = Float::with_val(work, x.as_float());
    let tiny = Float::with_val(work, Float::i_exp(1, -4 * work as i32));
    let mut f = x.clone();
    let mut c = x.clone();
    let mut d = Float::new(work);
    let mut delta = Float::new(work);
    let tol_exp = -(work as i32) + 2;
    let mut n: u32 = 0;
    loop {
        n += 1;
        // b_n = x, a_n = n
        d *= n;
        d += &x;
        if d.is_zero() {
            d.assign(&tiny);
        }
        d.recip_mut();
        c.recip_mut();
        c *= n;
        c += &x;
        if c.is_zero() {
            c.assign(&tiny);
        }
        delta.assign(&c * &d);
        f *= &delta;
        delta -= 1u32;
        if delta.is_zero() || delta.get_exp().map_or(true, |e| e < tol_exp) {
            break;
        }
    }
    Real::from_float(f)
}

/// Natural log of the standard normal density.
fn log_phi(x: &Real, work: u32) -> Real {
    -(x.with_prec(work).square().mul_pow2(-1)) - ln_sqrt_2pi(work)
}

/// `Q(x)` to relative accuracy about `2^-prec` for every real `x`.
pub fn q(x: &Real, prec: u32) -> Real {
    if x.is_zero() {
        return Real::ratio(1, 2, prec);
    }
    let ax = x.abs();
    let negative = x.is_sign_negative();
    let work = prec + GUARD_BITS;
    if continued_fraction_regime(&ax, work) {
        let upper = (log_phi(&ax, work) - mills_denominator(&ax, work).ln()).exp();
        let value = if negative {
            Real::one(work) - upper
        } else {
            upper
        };
        return value.with_prec(prec);
    }
    let xf = ax.to_f64();
    let cancel = (xf * xf / (2.0 * LN_2) + xf.max(1.0).log2() + 2.0).ceil() as u32;
    let work = if negative { work } else { work + cancel };
    let central = log_phi(&ax, work).exp() * odd_factorial_series(&ax, work);
    let half = Real::ratio(1, 2, work);
    let value = if negative {
        half + central
    } else {
        half - central
    };
    value.with_prec(prec)
}

/// `ln Q(x)` for `x >= 0`, without underflow for large `x`.
pub fn log_q(x: &Real, prec: u32) -> Result<Real> {
    Ok(log_q_and_phi(x, prec)?.0)
}

/// `(ln Q(x), ln phi(x))` at `prec` bits; both are needed for Newton steps.
fn log_q_and_phi(x: &Real, prec: u32) -> Result<(Real, Real)> {
    if x.is_sign_negative() {
        return Err(Error::Domain(format!("log_q requires x >= 0, got {x}")));
    }
    let work = prec + GUARD_BITS;
    let lphi = log_phi(x, work);
    if x.is_zero() {
        return Ok(((-Real::ln2(prec)), lphi.with_prec(prec)));
    }
    let value = if continued_fraction_regime(x, work) {
        &lphi - &mills_denominator(x, work).ln()
    } else {
        q(x, work).ln()
    };
    Ok((value.with_prec(prec), lphi.with_prec(prec)))
}

/// A probability argument for [`q_inv`].
pub trait Probability {
    /// `ln p` at `prec` bits.
    fn ln_at(&self, prec: u32) -> Result<Real>;
    /// Ordering of `p` against 1/2.
    fn cmp_half(&self) -> Ordering;
    fn complement(&self) -> Self
    where
        Self: Sized;
    /// Rejects values outside the open unit interval.
    fn check_open_unit(&self) -> Result<()>;
}

impl Probability for ExactDyadic {
    fn ln_at(&self, prec: u32) -> Result<Real> {
        self.ln(prec)
    }

    fn cmp_half(&self) -> Ordering {
        self.cmp(&ExactDyadic::half())
    }

    fn complement(&self) -> Self {
        ExactDyadic::complement(self)
    }

    fn check_open_unit(&self) -> Result<()> {
        if self.is_zero() || *self >= ExactDyadic::one() {
            return Err(Error::Domain(format!(
                "probability {self} is not in (0, 1)"
            )));
        }
        Ok(())
    }
}

impl Probability for Rational {
    fn ln_at(&self, prec: u32) -> Result<Real> {
        let work = prec + GUARD_BITS;
        let num = Real::from_integer(self.numer(), work).ln();
        let den = Real::from_integer(self.denom(), work).ln();
        Ok((num - den).with_prec(prec))
    }

    fn cmp_half(&self) -> Ordering {
        self.cmp(&Rational::from((1, 2)))
    }

    fn complement(&self) -> Self {
        Rational::from(1 - self)
    }

    fn check_open_unit(&self) -> Result<()> {
        if *self <= 0 || *self >= 1 {
            return Err(Error::Domain(format!(
                "probability {self} is not in (0, 1)"
            )));
        }
        Ok(())
    }
}

impl Probability for Real {
    fn ln_at(&self, prec: u32) -> Result<Real> {
        Ok(self.ln().with_prec(prec))
    }

    fn cmp_half(&self) -> Ordering {
        self.partial_cmp(&0.5).unwrap_or(Ordering::Equal)
    }

    fn complement(&self) -> Self {
        Real::one(self.prec()) - self
    }

    fn check_open_unit(&self) -> Result<()> {
        if !(*self > 0.0 && *self < 1.0) {
            return Err(Error::Domain(format!(
                "probability {self} is not in (0, 1)"
            )));
        }
        Ok(())
    }
}

/// The `x` with `Q(x) = p`; positive exactly when `p < 1/2`.
pub fn q_inv<P: Probability>(p: &P, prec: u32) -> Result<Real> {
    p.check_open_unit()?;
    match p.cmp_half() {
        Ordering::Equal => Ok(Real::zero(prec)),
        Ordering::Greater => Ok(-upper_q_inv(&p.complement(), prec)?),
        Ordering::Less => upper_q_inv(p, prec),
    }
}

/// Starting point from `L = -ln p`, `p < 1/2`, in double precision.
fn initial_guess(neg_ln_p: f64) -> f64 {
    let u = 0.5 - (-neg_ln_p).exp();
    if neg_ln_p < 1.2 {
        // Inverse of the Taylor expansion of Phi about 0.
        let s = (2.0 * PI).sqrt() * u;
        return s + s.powi(3) / 6.0 + 7.0 * s.powi(5) / 120.0;
    }
    // Q(x) ~ phi(x) x / (1 + x^2)
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut x = (2.0 * neg_ln_p).sqrt();
    for _ in 0..4 {
        let arg = neg_ln_p - half_ln_2pi - ((1.0 + x * x) / x).ln();
        if arg <= 0.0 {
            break;
        }
        x = (2.0 * arg).sqrt();
    }
    x
}

fn upper_q_inv<P: Probability>(p: &P, prec: u32) -> Result<Real> {
    let coarse = 64;
    let neg_ln_p_f64 = -p.ln_at(coarse)?.to_f64();
    let mut x = Real::from_f64(initial_guess(neg_ln_p_f64), coarse);
    let mut rel_bits = 50;
    for stage_prec in [coarse, prec] {
        let work = stage_prec + 8;
        let neg_ln_p = -p.ln_at(work)?;
        // Q(x) <= exp(-x^2/2)/2, so the root lies below sqrt(2(L - ln 2)).
        let hi = ((&neg_ln_p - &Real::ln2(work)).mul_pow2(1)).sqrt() + Real::pow2(-20, work);
        let lo = Real::zero(work);
        let tol = x.abs().max(Real::pow2(-30, work)).mul_pow2(-rel_bits);
        let res = RootSearch::new(&lo, &hi, &tol, work)
            .guess(&x)
            .endpoint_signs(1, -1)
            .run(|t| {
                let (lq, lphi) = log_q_and_phi(t, work)?;
                let slope = -(&lphi - &lq).exp();
                Ok(Sample::with_slope(lq + &neg_ln_p, slope))
            })?;
        x = res.root;
        rel_bits = prec as i32 - 2;
    }
    Ok(x.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    /// Independent reference: MPFR's own erfc.
    fn mpfr_q(x: &Real, prec: u32) -> Real {
        let w = prec + 32;
        let arg = Float::with_val(w, x.as_float() / Float::with_val(w, 2).sqrt());
        Real::from_rational(
            &Float::with_val(w, arg.erfc() / 2).to_rational().unwrap(),
            prec,
        )
    }

    fn rel_err(a: &Real, b: &Real) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    #[test]
    fn q_matches_mpfr_erfc_across_regimes() {
        for prec in [64u32, 128, 256, 512] {
            for s in [
                "-6.5", "-1", "-1e-9", "1e-12", "0.3", "0.723359", "1.5", "3", "4.4", "5.9", "8",
                "12.5", "37.11", "60",
            ] {
                let x = Real::parse(s, prec).unwrap();
                let got = q(&x, prec);
                let want = mpfr_q(&x, prec);
                let err = rel_err(&got, &want);
                assert!(
                    err <= 2f64.powi(8 - prec as i32),
                    "x={s} P={prec} err={err:e}"
                );
            }
        }
    }

    #[test]
    fn q_reflection() {
        for s in ["0.1", "0.9", "2.5", "7"] {
            let x = Real::parse(s, 256).unwrap();
            let sum = q(&x, 256) + q(&-&x, 256);
            assert!((sum - 1).abs() <= Real::pow2(8 - 256, 256), "{s}");
        }
    }

    #[test]
    fn q_at_zero_and_reference_points() {
        assert_eq!(q(&Real::zero(128), 128), 0.5);
        let a = q(&Real::parse("0.723359", 128).unwrap(), 128).to_f64();
        let b = q(&Real::parse("0.6435214", 128).unwrap(), 128).to_f64();
        assert!((a - 0.234_729_676_770_601_17).abs() < 1e-15);
        assert!((b - 0.259_942_916_703_273_8).abs() < 1e-15);
    }

    #[test]
    fn log_q_values() {
        let l0 = log_q(&Real::zero(128), 128).unwrap();
        assert_eq!(l0, -Real::ln2(128));
        let l10 = log_q(&Real::from_i64(10, 128), 128).unwrap().to_f64();
        assert!((l10 + 53.231_285_150_512_47).abs() < 1e-12);
        let l = log_q(&Real::parse("37.11", 128).unwrap(), 128)
            .unwrap()
            .to_f64();
        assert!((l + 693.109_599_830_995_7).abs() < 1e-10);
        // Far beyond any double-precision exponent.
        let far = log_q(&Real::from_i64(100_000, 128), 128).unwrap().to_f64();
        assert!((far + 5e9 + 12.431_864).abs() < 1e-5, "{far}");
        assert!(matches!(
            log_q(&Real::from_f64(-0.5, 64), 64),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn log_q_consistent_with_q() {
        for s in ["0.01", "1", "3.9", "4.1", "10", "29.5"] {
            let x = Real::parse(s, 192).unwrap();
            let via_log = log_q(&x, 192).unwrap().exp();
            assert!(rel_err(&via_log, &q(&x, 192)) <= 2f64.powi(10 - 192), "{s}");
        }
    }

    #[test]
    fn inverse_values() {
        assert!(q_inv(&ExactDyadic::half(), 128).unwrap().is_zero());
        let quarter = Rational::from((1, 4));
        let x = q_inv(&quarter, 128).unwrap();
        assert!((x.to_f64() - 0.674_489_750_196_081_7).abs() < 1e-15);
        assert!(x > 0.6435214 && x < 0.723359);
        let three_quarters = Rational::from((3, 4));
        assert_eq!(q_inv(&three_quarters, 128).unwrap(), -x);
        let p = ExactDyadic::new(rug::Integer::from(1), 1000);
        let x = q_inv(&p, 256).unwrap();
        assert!((x.to_f64() - 37.111_011_937_164_79).abs() < 1e-12);
        let back = q(&x, 256);
        assert!(rel_err(&back, &p.to_real(256)) <= 2f64.powi(-128));
    }

    #[test]
    fn inverse_accepts_reals() {
        let p = Real::parse("0.025", 128).unwrap();
        let x = q_inv(&p, 128).unwrap();
        assert!((x.to_f64() - 1.959_963_984_540_054).abs() < 1e-14);
    }

    #[test]
    fn inverse_domain() {
        assert!(q_inv(&Rational::from(0), 64).is_err());
        assert!(q_inv(&Rational::from(1), 64).is_err());
        assert!(q_inv(&Real::from_f64(1.5, 64), 64).is_err());
        assert!(q_inv(&ExactDyadic::one(), 64).is_err());
    }
}
