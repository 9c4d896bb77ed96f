//! Exact law of `X_m`, the sum of `m` independent random signs.
//!
//! Every probability is an [`ExactDyadic`]: a big-integer count over the
//! explicit denominator `2^m`, never reduced, so tail/CDF identities are
//! integer identities.

use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::Real;

/// `numerator / 2^exponent`, a probability in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct ExactDyadic {
    numerator: Integer,
    exponent: u32,
}

impl ExactDyadic {
    /// Panics if the value would fall outside `[0, 1]`.
    pub fn new(numerator: Integer, exponent: u32) -> Self {
        assert!(numerator >= 0, "dyadic probability must be non-negative");
        assert!(
            numerator <= (Integer::from(1) << exponent),
            "dyadic probability must not exceed one"
        );
        ExactDyadic {
            numerator,
            exponent,
        }
    }

    pub fn one() -> Self {
        ExactDyadic::new(Integer::from(1), 0)
    }

    pub fn half() -> Self {
        ExactDyadic::new(Integer::from(1), 1)
    }

    pub fn numerator(&self) -> &Integer {
        &self.numerator
    }

    /// The denominator is `2^exponent`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// `1 - self`, on the same denominator.
    pub fn complement(&self) -> Self {
        let full = Integer::from(1) << self.exponent;
        ExactDyadic::new(full - &self.numerator, self.exponent)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from((self.numerator.clone(), Integer::from(1) << self.exponent))
    }

    /// Rounded once to `prec` bits.
    pub fn to_real(&self, prec: u32) -> Real {
        Real::from_integer(&self.numerator, prec).mul_pow2(-(self.exponent as i32))
    }

    /// Natural logarithm, computed from the numerator so that values far
    /// below the double-precision range stay exact up to the final rounding.
    pub fn ln(&self, prec: u32) -> Result<Real> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero probability".into()));
        }
        let work = prec + 16;
        let num = Real::from_integer(&self.numerator, work).ln();
        let den = Real::ln2(work) * i64::from(self.exponent);
        Ok((num - den).with_prec(prec))
    }

    /// Base-2 logarithm; exact for powers of two.
    pub fn log2(&self, prec: u32) -> Result<Real> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero probability".into()));
        }
        let bits = self.numerator.significant_bits() + self.exponent + 8;
        let num = Real::from_integer(&self.numerator, bits.max(prec + 16)).log2();
        Ok((num - i64::from(self.exponent)).with_prec(prec))
    }

    fn aligned(&self, other: &ExactDyadic) -> (Integer, Integer, u32) {
        let e = self.exponent.max(other.exponent);
        let a = Integer::from(&self.numerator << (e - self.exponent));
        let b = Integer::from(&other.numerator << (e - other.exponent));
        (a, b, e)
    }

    /// Exact sum; panics if it exceeds one.
    pub fn add(&self, other: &ExactDyadic) -> ExactDyadic {
        let (a, b, e) = self.aligned(other);
        ExactDyadic::new(a + b, e)
    }
}

impl PartialEq for ExactDyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactDyadic {}

impl PartialOrd for ExactDyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactDyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for ExactDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

/// `C(m, i)`, zero outside `0..=m`.
pub fn binom_coeff(m: u32, i: i64) -> Integer {
    if i < 0 || i > i64::from(m) {
        return Integer::new();
    }
    // Walk from the nearer end; the recurrence C(m, j+1) = C(m, j)(m-j)/(j+1)
    // divides exactly at every step.
    let i = i as u32;
    let steps = i.min(m - i);
    let mut c = Integer::from(1);
    for j in 0..steps {
        c *= m - j;
        c.div_exact_u_mut(j + 1);
    }
    c
}

/// All coefficients `C(m, 0..=m)` by the same recurrence.
pub fn binom_row(m: u32) -> Vec<Integer> {
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut c = Integer::from(1);
    row.push(c.clone());
    for j in 0..m {
        c *= m - j;
        c.div_exact_u_mut(j + 1);
        row.push(c.clone());
    }
    row
}

/// One tail point of the conjecture: `p = P(X_m >= 2k - m)` and
/// `x = (2k - m) / m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailPoint {
    pub m: u32,
    pub k: u32,
    pub p: ExactDyadic,
    pub x: Rational,
}

impl TailPoint {
    pub fn new(m: u32, k: u32) -> Result<Self> {
        let p = tail_prob(m, i64::from(k))?;
        Ok(TailPoint {
            m,
            k,
            p,
            x: tail_abscissa(m, k),
        })
    }
}

/// `x_{k,m} = (2k - m) / m`.
pub fn tail_abscissa(m: u32, k: u32) -> Rational {
    Rational::from((2 * i64::from(k) - i64::from(m), i64::from(m)))
}

fn check_tail_index(m: u32, k: i64) -> Result<()> {
    let m_i = i64::from(m);
    if m == 0 || m % 2 != 0 || 2 * k <= m_i || k > m_i {
        return Err(Error::IndexOutOfRange { m, k });
    }
    Ok(())
}

/// `p_{k,m} = 2^-m * sum_{i=k}^{m} C(m, i)` for even `m` and `m/2 < k <= m`.
pub fn tail_prob(m: u32, k: i64) -> Result<ExactDyadic> {
    check_tail_index(m, k)?;
    let mut sum = Integer::new();
    let mut c = Integer::from(1); // C(m, m)
    for i in (k..=i64::from(m)).rev() {
        sum += &c;
        // C(m, i-1) = C(m, i) * i / (m - i + 1)
        c *= i as u32;
        c.div_exact_u_mut(m - i as u32 + 1);
    }
    Ok(ExactDyadic::new(sum, m))
}

/// `p_{k,m}` for every valid `k`, in increasing `k`.
pub fn tail_probs(m: u32) -> Result<Vec<(u32, ExactDyadic)>> {
    check_tail_index(m, i64::from(m))?;
    let row = binom_row(m);
    let mut out = Vec::with_capacity(m as usize / 2);
    let mut sum = Integer::new();
    for k in ((m / 2 + 1)..=m).rev() {
        sum += &row[k as usize];
        out.push((k, ExactDyadic::new(sum.clone(), m)));
    }
    out.reverse();
    Ok(out)
}

/// Support points `-m, -m+2, ..., m`.
pub fn support(m: u32) -> Vec<i64> {
    let m = i64::from(m);
    (0..=m).map(|j| 2 * j - m).collect()
}

fn support_index(m: u32, s: i64) -> Result<u32> {
    let m_i = i64::from(m);
    if m == 0 || s < -m_i || s > m_i || (s + m_i) % 2 != 0 {
        return Err(Error::NotInSupport { m, s });
    }
    Ok(((s + m_i) / 2) as u32)
}

/// `P(X_m = s)`.
pub fn pmf(m: u32, s: i64) -> Result<ExactDyadic> {
    let j = support_index(m, s)?;
    Ok(ExactDyadic::new(binom_coeff(m, i64::from(j)), m))
}

/// `P(X_m <= s)`.
pub fn cdf(m: u32, s: i64) -> Result<ExactDyadic> {
    let j = support_index(m, s)?;
    let row = binom_row(m);
    let count: Integer = row[..=j as usize].iter().sum();
    Ok(ExactDyadic::new(count, m))
}

/// `P(X_m <= s)` for every support point, ascending.
pub fn cdf_row(m: u32) -> Vec<ExactDyadic> {
    let mut acc = Integer::new();
    binom_row(m)
        .into_iter()
        .map(|c| {
            acc += c;
            ExactDyadic::new(acc.clone(), m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(n: u64, e: u32) -> ExactDyadic {
        ExactDyadic::new(Integer::from(n), e)
    }

    fn pascal(m: usize) -> Vec<Vec<Integer>> {
        let mut rows = vec![vec![Integer::from(1)]];
        for n in 1..=m {
            let prev = &rows[n - 1];
            let mut row = vec![Integer::from(1)];
            for i in 1..n {
                row.push(Integer::from(&prev[i - 1] + &prev[i]));
            }
            row.push(Integer::from(1));
            rows.push(row);
        }
        rows
    }

    /// Counts sign vectors of length `m` with sum >= threshold.
    fn enumerate_tail(m: u32, threshold: i64) -> u64 {
        (0u64..1 << m)
            .filter(|bits| {
                let ones = i64::from(bits.count_ones());
                2 * ones - i64::from(m) >= threshold
            })
            .count() as u64
    }

    #[test]
    fn coefficients() {
        assert_eq!(binom_coeff(4, 2), 6);
        assert_eq!(binom_coeff(2, 3), 0);
        assert_eq!(binom_coeff(2, -1), 0);
        let tri = pascal(60);
        assert_eq!(binom_coeff(10, 5), tri[10][5]);
        for m in 0..=60u32 {
            assert_eq!(binom_row(m), tri[m as usize]);
            for i in 0..=m {
                assert_eq!(binom_coeff(m, i64::from(i)), tri[m as usize][i as usize]);
            }
        }
    }

    #[test]
    fn tails() {
        assert_eq!(tail_prob(2, 2).unwrap(), dy(1, 2));
        assert_eq!(tail_prob(10, 10).unwrap(), dy(1, 10));
        assert_eq!(tail_prob(4, 3).unwrap(), dy(5, 4));
        assert_eq!(tail_prob(4, 3).unwrap().numerator(), &enumerate_tail(4, 2));
        for m in (2..=16u32).step_by(2) {
            for (k, p) in tail_probs(m).unwrap() {
                assert_eq!(p, tail_prob(m, i64::from(k)).unwrap());
                assert_eq!(
                    *p.numerator(),
                    enumerate_tail(m, 2 * i64::from(k) - i64::from(m))
                );
                assert!(p <= ExactDyadic::half());
            }
        }
    }

    #[test]
    fn tail_index_errors() {
        for (m, k) in [(2, 1), (2, 3), (4, 2), (3, 3), (0, 0)] {
            assert!(
                matches!(tail_prob(m, k), Err(Error::IndexOutOfRange { .. })),
                "{m} {k}"
            );
        }
    }

    #[test]
    fn point_masses_and_cdf() {
        assert_eq!(pmf(2, 0).unwrap(), dy(1, 1));
        assert_eq!(pmf(4, 2).unwrap(), dy(4, 4));
        assert_eq!(pmf(1, 1).unwrap(), dy(1, 1));
        assert_eq!(cdf(2, 2).unwrap(), ExactDyadic::one());
        assert_eq!(cdf(2, 0).unwrap(), dy(3, 2));
        assert_eq!(cdf(4, -4).unwrap(), dy(1, 4));
        assert!(matches!(pmf(4, 1), Err(Error::NotInSupport { .. })));
        assert!(matches!(cdf(4, 6), Err(Error::NotInSupport { .. })));
        assert_eq!(
            cdf_row(4)
                .iter()
                .map(|d| d.numerator().to_u32().unwrap())
                .collect::<Vec<_>>(),
            [1, 5, 11, 15, 16]
        );
    }

    #[test]
    fn support_points() {
        assert_eq!(support(1), vec![-1, 1]);
        assert_eq!(support(2), vec![-2, 0, 2]);
        assert_eq!(support(4), vec![-4, -2, 0, 2, 4]);
    }

    #[test]
    fn dyadic_logs() {
        let p = dy(1, 10);
        assert_eq!(p.log2(128).unwrap(), -10.0);
        let ln = p.ln(128).unwrap();
        let expected = Real::ln2(128) * -10;
        assert!((&ln - &expected).abs() < Real::pow2(-120, 128));
        let tiny = dy(1, 1000);
        assert_eq!(tiny.log2(64).unwrap(), -1000.0);
        assert!((tiny.to_real(128).to_f64() - 2f64.powi(-1000)).abs() < 1e-310);
        assert!(ExactDyadic::new(Integer::new(), 3).ln(64).is_err());
    }

    #[test]
    fn dyadic_ordering_ignores_representation() {
        assert_eq!(dy(1, 1), dy(2, 2));
        assert!(dy(5, 4) > dy(1, 4));
        assert_eq!(dy(5, 4).complement(), dy(11, 4));
        assert_eq!(dy(1, 2).add(&dy(1, 1)), dy(3, 2));
    }
}
