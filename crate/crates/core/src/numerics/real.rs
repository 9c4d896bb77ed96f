use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 64;
/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;
/// Ceiling for adaptive precision doubling.
pub const MAX_PRECISION: u32 = 4096;

/// A binary floating-point number carrying its own precision.
///
/// Backed by MPFR, so each elementary operation is correctly rounded
/// (relative error at most 2^-P at precision P). Binary operations round
/// to the larger of the two operand precisions.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_f64(value: f64, prec: u32) -> Self {
        Real(Float::with_val(prec, value))
    }

    pub fn from_i64(value: i64, prec: u32) -> Self {
        Real(Float::with_val(prec, value))
    }

    pub fn from_integer(value: &Integer, prec: u32) -> Self {
        Real(Float::with_val(prec, value))
    }

    pub fn from_rational(value: &Rational, prec: u32) -> Self {
        Real(Float::with_val(prec, value))
    }

    /// `num / den` rounded once.
    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        Real::from_rational(&Rational::from((num, den)), prec)
    }

    /// Parses a decimal literal such as `0.723359` or `-1.5e-3`, rounding
    /// once to `prec` bits.
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::Domain(format!("cannot parse `{text}` as a number: {e}")))?;
        let value = Float::with_val(prec, parsed);
        if !value.is_finite() {
            return Err(Error::Domain(format!("`{text}` is not finite")));
        }
        Ok(Real(value))
    }

    pub fn zero(prec: u32) -> Self {
        Real(Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Real::from_i64(1, prec)
    }

    pub fn ln2(prec: u32) -> Self {
        Real(Float::with_val(prec, Constant::Log2))
    }

    pub fn pi(prec: u32) -> Self {
        Real(Float::with_val(prec, Constant::Pi))
    }

    /// `2^exp`, exact.
    pub fn pow2(exp: i32, prec: u32) -> Self {
        let mut v = Float::with_val(prec, 1);
        v <<= exp;
        Real(v)
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or widens) to a new precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        let mut v = self.0.clone();
        v.set_prec(prec);
        Real(v)
    }

    pub fn from_float(value: Float) -> Self {
        Real(value)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Exact conversion to a rational; `None` for infinities and NaN.
    pub fn to_rational(&self) -> Option<Rational> {
        self.0.to_rational()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// -1, 0 or 1.
    pub fn sign(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    /// Base-2 exponent `e` with `2^(e-1) <= |self| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    pub fn square(&self) -> Self {
        Real(self.0.clone().square())
    }

    pub fn recip(&self) -> Self {
        Real(self.0.clone().recip())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.clone().sqrt())
    }

    pub fn ln(&self) -> Self {
        Real(self.0.clone().ln())
    }

    pub fn log2(&self) -> Self {
        Real(self.0.clone().log2())
    }

    pub fn ln_1p(&self) -> Self {
        Real(self.0.clone().ln_1p())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.clone().exp())
    }

    pub fn exp_m1(&self) -> Self {
        Real(self.0.clone().exp_m1())
    }

    pub fn atanh(&self) -> Self {
        Real(self.0.clone().atanh())
    }

    pub fn tanh(&self) -> Self {
        Real(self.0.clone().tanh())
    }

    pub fn cosh(&self) -> Self {
        Real(self.0.clone().cosh())
    }

    pub fn sinh(&self) -> Self {
        Real(self.0.clone().sinh())
    }

    /// Multiplication by `2^exp`, exact.
    pub fn mul_pow2(&self, exp: i32) -> Self {
        let mut v = self.0.clone();
        v <<= exp;
        Real(v)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Decimal rendering with `digits` significant digits, trailing zeros
    /// trimmed. Reading the string back at the same precision reproduces
    /// the value when `digits >= ceil(P log10 2) + 1`.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_nan() {
            return "NaN".into();
        }
        if self.0.is_infinite() {
            return if self.0.is_sign_negative() {
                "-inf"
            } else {
                "inf"
            }
            .into();
        }
        if self.0.is_zero() {
            return "0".into();
        }
        let (neg, mantissa, exp) =
            self.0
                .to_sign_string_exp_round(10, Some(digits.max(1)), Round::Nearest);
        let exp = exp.unwrap_or(0);
        let mantissa = mantissa.trim_end_matches('0');
        let mantissa = if mantissa.is_empty() { "0" } else { mantissa };
        let n = mantissa.len() as i32;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        // value = 0.<mantissa> * 10^exp
        if (-6..=0).contains(&exp) {
            out.push_str("0.");
            for _ in 0..(-exp) {
                out.push('0');
            }
            out.push_str(mantissa);
        } else if exp > 0 && exp <= 40 {
            if n <= exp {
                out.push_str(mantissa);
                for _ in 0..(exp - n) {
                    out.push('0');
                }
            } else {
                out.push_str(&mantissa[..exp as usize]);
                out.push('.');
                out.push_str(&mantissa[exp as usize..]);
            }
        } else {
            out.push_str(&mantissa[..1]);
            if n > 1 {
                out.push('.');
                out.push_str(&mantissa[1..]);
            }
            out.push('e');
            out.push_str(&(exp - 1).to_string());
        }
        out
    }
}

/// Significant decimal digits that round-trip a `prec`-bit value.
pub fn decimal_digits(prec: u32) -> usize {
    (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}]",
            self.to_decimal(decimal_digits(self.prec())),
            self.prec()
        )
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_decimal(d)),
            None => f.write_str(&self.to_decimal(decimal_digits(self.prec()))),
        }
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let prec = self.0.prec().max(rhs.0.prec());
                Real(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                Real(Float::with_val(self.0.prec(), &self.0 $op rhs))
            }
        }
        impl $trait<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

/// Rejects precisions below [`MIN_PRECISION`].
/// Parses a plain decimal such as `-1.036` or `2.5e-3` into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::Domain(format!("`{text}` is not a decimal number"));
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = [int_part, frac_part].concat();
    let mut value = Rational::from(all.parse::<Integer>().map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from(Integer::from(Integer::u_pow_u(10, scale.unsigned_abs())));
    if scale >= 0 {
        value *= ten;
    } else {
        value /= ten;
    }
    Ok(if neg { -value } else { value })
}

pub fn check_precision(prec: u32) -> Result<()> {
    if prec < MIN_PRECISION || prec > rug::float::prec_max() {
        return Err(Error::InvalidPrecision(prec));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing() {
        assert_eq!(
            parse_decimal("1.036").unwrap(),
            Rational::from((1036, 1000))
        );
        assert_eq!(parse_decimal("-2.5e-3").unwrap(), Rational::from((-1, 400)));
        assert_eq!(parse_decimal("12E2").unwrap(), Rational::from(1200));
        assert_eq!(parse_decimal(".5").unwrap(), Rational::from((1, 2)));
        for bad in ["", "-", "1.2.3", "abc", "1e", "0x10"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Real::from_i64(-10, 128).to_decimal(39), "-10");
        assert_eq!(Real::ratio(1, 4, 128).to_decimal(39), "0.25");
        assert_eq!(Real::pow2(-1000, 128).to_decimal(5), "9.3326e-302");
        assert_eq!(Real::from_f64(1234.5, 64).to_decimal(20), "1234.5");
        assert_eq!(Real::zero(64).to_decimal(10), "0");
        assert_eq!(Real::ratio(1, 3, 128).to_decimal(5), "0.33333");
    }

    #[test]
    fn decimal_round_trip() {
        let third = Real::ratio(1, 3, 128);
        let text = third.to_decimal(decimal_digits(128) + 1);
        assert_eq!(Real::parse(&text, 128).unwrap(), third);
    }

    #[test]
    fn precision_follows_wider_operand() {
        let a = Real::one(64);
        let b = Real::ratio(1, 3, 256);
        assert_eq!((&a + &b).prec(), 256);
        assert_eq!((a * 3).prec(), 64);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Real::parse("0.5x", 64).is_err());
        assert!(Real::parse("inf", 64).is_err());
    }

    #[test]
    fn elementary_accuracy() {
        // atanh(1/2) = ln(3)/2
        let p = 256;
        let lhs = Real::ratio(1, 2, p).atanh();
        let rhs = Real::from_i64(3, p).ln().mul_pow2(-1);
        let err = (&lhs - &rhs).abs();
        assert!(err < Real::pow2(2 - 256, p) * &lhs);
    }
}
