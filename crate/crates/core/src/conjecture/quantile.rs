use std::cmp::Ordering;

use rug::Rational;

use crate::binomial::{cdf_row, support, ExactDyadic};
use crate::error::{Error, Result};
use crate::gaussian::{q, q_inv};
use crate::numerics::{enclose, precision_ladder, Enclosure, Real, MAX_PRECISION};
use crate::rate::{default_tolerance, f_inv, f_max};

use super::delta::sharp_step_bound;

/// Offset placed on each side of a breakpoint in the margin grid.
pub const BREAKPOINT_OFFSET_EXP: i32 = -40;

/// The quantile transform `Psi_m`, with the CDF row of `X_m` cached so
/// repeated evaluations at one `m` stay cheap.
#[derive(Clone, Debug)]
pub struct QuantileTransform {
    m: u32,
    cdf: Vec<ExactDyadic>,
    prec: u32,
    max_prec: u32,
}

/// Gaussian side of the comparison, refined lazily.
struct Threshold<'a> {
    z: &'a Real,
    levels: Vec<(u32, Enclosure)>,
}

impl Threshold<'_> {
    fn at(&mut self, level: usize, prec: u32) -> Result<&Enclosure> {
        while self.levels.len() <= level {
            let p = prec << self.levels.len();
            let z = self.z;
            self.levels.push((p, enclose(|w| Ok(q(z, w)), p)?));
        }
        Ok(&self.levels[level].1)
    }
}

impl QuantileTransform {
    pub fn new(m: u32, prec: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("the quantile transform needs m >= 1".into()));
        }
        Ok(QuantileTransform {
            m,
            cdf: cdf_row(m),
            prec,
            max_prec: MAX_PRECISION.max(prec),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Orders the exact value `s` against the threshold, doubling the
    /// precision until the enclosure excludes `s`. `None` means a tie
    /// that could not be separated.
    fn order(&self, s: &Rational, th: &mut Threshold<'_>) -> Result<Option<Ordering>> {
        for (level, _) in precision_ladder(self.prec, self.max_prec).enumerate() {
            let enc = th.at(level, self.prec)?;
            if *enc.lo().as_float() > *s {
                return Ok(Some(Ordering::Less));
            }
            if *enc.hi().as_float() < *s {
                return Ok(Some(Ordering::Greater));
            }
            if enc.radius.is_zero() {
                return Ok(Some(Ordering::Equal));
            }
        }
        Ok(None)
    }

    /// `Psi_m(y)`: the smallest support point `s` with
    /// `P(X_m > s) < Q(y / sqrt m)`, so that the value jumps up exactly at
    /// each breakpoint.
    pub fn psi(&self, y: &Real) -> Result<i64> {
        let m = self.m;
        let work = self.prec.max(y.prec());
        let z = y.with_prec(work + 8) / &Real::from_i64(i64::from(m), work + 8).sqrt();
        let index = if z.is_zero() {
            // Q(0) = 1/2 exactly.
            let half = Rational::from((1, 2));
            self.first_index(|j| Ok(self.cdf[j].complement().to_rational() < half))?
        } else {
            let az = z.abs();
            let mut th = Threshold {
                z: &az,
                levels: Vec::new(),
            };
            if z.is_sign_negative() {
                // P(X > s) < 1 - Q(|z|)  <=>  P(X <= s) > Q(|z|)
                self.first_index(|j| {
                    Ok(self.order(&self.cdf[j].to_rational(), &mut th)? == Some(Ordering::Greater))
                })?
            } else {
                self.first_index(|j| {
                    let tail = self.cdf[j].complement().to_rational();
                    Ok(self.order(&tail, &mut th)? == Some(Ordering::Less))
                })?
            }
        };
        Ok(2 * index as i64 - i64::from(m))
    }

    /// `Psi_m(y)` together with the classical and sharpened margins at `y`.
    pub fn margins(&self, y: &Real) -> Result<MarginSample> {
        let psi = self.psi(y)?;
        let sharp = sharp_margin_from(self.m, y, psi, self.prec)?;
        Ok(MarginSample {
            classical: classical_margin(self.m, y, psi),
            sharp: sharp.margin,
            saturated: sharp.saturated,
            psi,
            y: y.clone(),
        })
    }

    /// First support index satisfying a monotone predicate; the top index
    /// is the fallback.
    fn first_index<F>(&self, mut pred: F) -> Result<usize>
    where
        F: FnMut(usize) -> Result<bool>,
    {
        let (mut lo, mut hi) = (0usize, self.m as usize);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }
}

/// `Psi_m(y)` for a single point.
pub fn psi_m(m: u32, y: &Real, prec: u32) -> Result<i64> {
    QuantileTransform::new(m, prec)?.psi(y)
}

/// `Psi_m` as an explicit step function.
#[derive(Clone, Debug)]
pub struct StepFunction {
    pub m: u32,
    /// `breakpoints[j]` separates `values[j]` from `values[j + 1]`.
    pub breakpoints: Vec<Real>,
    pub values: Vec<i64>,
}

impl StepFunction {
    /// Value at `y`, taking the upper value at a breakpoint.
    pub fn eval(&self, y: &Real) -> i64 {
        let j = self.breakpoints.partition_point(|b| b <= y);
        self.values[j]
    }

    /// Breakpoints and values in the rescaled coordinates
    /// `eta = y / m`, `xi = s / m`.
    pub fn rescaled(&self) -> (Vec<Real>, Vec<Real>) {
        let prec = self.breakpoints.first().map_or(64, Real::prec);
        let m = i64::from(self.m);
        let eta = self.breakpoints.iter().map(|b| b / m).collect();
        let xi = self
            .values
            .iter()
            .map(|&s| Real::ratio(s, m, prec))
            .collect();
        (eta, xi)
    }
}

/// Breakpoints `sqrt(m) Q^-1(P(X_m > s))` for every support point below the top.
pub fn step_function(m: u32, prec: u32) -> Result<StepFunction> {
    if m == 0 {
        return Err(Error::Domain("the step function needs m >= 1".into()));
    }
    let sqrt_m = Real::from_i64(i64::from(m), prec).sqrt();
    let cdf = cdf_row(m);
    let breakpoints = cdf[..m as usize]
        .iter()
        .map(|c| Ok(q_inv(&c.complement(), prec)? * &sqrt_m))
        .collect::<Result<Vec<_>>>()?;
    Ok(StepFunction {
        m,
        breakpoints,
        values: support(m),
    })
}

/// `y^2 / m + 1 - |Psi_m(y) - y|`; nonnegative where the classical
/// inequality holds.
pub fn tusnady_margin(m: u32, y: &Real, prec: u32) -> Result<Real> {
    let psi = psi_m(m, y, prec)?;
    Ok(classical_margin(m, y, psi))
}

fn classical_margin(m: u32, y: &Real, psi: i64) -> Real {
    let prec = y.prec();
    let gap = (Real::from_i64(psi, prec) - y).abs();
    y.square() / i64::from(m) + 1 - gap
}

/// `sign(y) m f^-1(|y| / m)`, saturating at `+-m` once `|y| / m` leaves the
/// range of `f`. The flag reports saturation.
pub fn smooth_transform(m: u32, y: &Real, prec: u32) -> Result<(Real, bool)> {
    let mi = i64::from(m);
    let u = y.with_prec(prec).abs() / mi;
    let (t, saturated) = if u >= f_max(prec) {
        (Real::from_i64(mi, prec), true)
    } else {
        (f_inv(&u, prec, &default_tolerance(prec))? * mi, false)
    };
    Ok(if y.is_sign_negative() {
        (-t, saturated)
    } else {
        (t, saturated)
    })
}

/// `1.1036 - |Psi_m(y) - T_m(y)|`, with the saturation flag of `T_m`.
#[derive(Clone, Debug)]
pub struct SharpMargin {
    pub margin: Real,
    pub saturated: bool,
}

pub fn sharp_margin(m: u32, y: &Real, prec: u32) -> Result<SharpMargin> {
    let psi = psi_m(m, y, prec)?;
    sharp_margin_from(m, y, psi, prec)
}

fn sharp_margin_from(m: u32, y: &Real, psi: i64, prec: u32) -> Result<SharpMargin> {
    let (t, saturated) = smooth_transform(m, y, prec)?;
    let gap = (Real::from_i64(psi, prec) - t).abs();
    let margin = Real::from_rational(&sharp_step_bound(), prec) - gap;
    Ok(SharpMargin { margin, saturated })
}

/// Sample points for the margin checks: `j / 8` for `|j| <= 24 sqrt(m)`,
/// plus every breakpoint shifted by `+-2^-40`.
pub fn margin_grid(steps: &StepFunction, prec: u32) -> Vec<Real> {
    let reach = (24.0 * f64::from(steps.m).sqrt()).floor() as i64;
    let mut grid: Vec<Real> = (-reach..=reach).map(|j| Real::ratio(j, 8, prec)).collect();
    let offset = Real::pow2(BREAKPOINT_OFFSET_EXP, prec);
    for b in &steps.breakpoints {
        let b = b.with_prec(prec);
        grid.push(&b - &offset);
        grid.push(&b + &offset);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    grid
}

/// One margin evaluation on the grid.
#[derive(Clone, Debug)]
pub struct MarginSample {
    pub y: Real,
    pub psi: i64,
    pub classical: Real,
    pub sharp: Real,
    pub saturated: bool,
}

/// Classical and sharpened margins at every point of [`margin_grid`].
pub fn margins_on_grid(m: u32, prec: u32) -> Result<Vec<MarginSample>> {
    let transform = QuantileTransform::new(m, prec)?;
    let steps = step_function(m, prec)?;
    margin_grid(&steps, prec)
        .into_iter()
        .map(|y| transform.margins(&y))
        .collect()
}
