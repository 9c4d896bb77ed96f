//! The rate function `f` of the symmetric walk and its inverse, plus the
//! Chernoff machinery for a general law given by its moment generator:
//! `psi = R'/R`, `alpha = psi^-1`, `rho(x) = R(alpha(x)) exp(-x alpha(x))`,
//! and the Gaussian coupling `rho_F(x) = rho_G(y)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Real, RootSearch, Sample};

/// `(1+x) ln(1+x) + (1-x) ln(1-x)` on `[0, 1]`, i.e. `f(x)^2`.
///
/// Below 1/2 this is rewritten as `2x atanh(x) + ln(1 - x^2)`, whose two
/// terms are about `2x^2` and `-x^2`, so at most one bit cancels. Above 1/2
/// the direct form has no cancellation.
pub fn f_squared(x: &Real, prec: u32) -> Result<Real> {
    check_unit(x)?;
    let work = prec + 8;
    let x = x.with_prec(work);
    if x.is_zero() {
        return Ok(Real::zero(prec));
    }
    if x == 1.0 {
        return Ok(Real::ln2(prec).mul_pow2(1));
    }
    let v = if x < 0.5 {
        x.atanh().mul_pow2(1) * &x + (-x.square()).ln_1p()
    } else {
        let up = (Real::one(work) + &x) * x.ln_1p();
        let down = (Real::one(work) - &x) * (-&x).ln_1p();
        up + down
    };
    Ok(v.with_prec(prec))
}

fn check_unit(x: &Real) -> Result<()> {
    if !(*x >= 0.0 && *x <= 1.0) {
        return Err(Error::Domain(format!(
            "rate function argument {x} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// `f(x) = sqrt((1+x) ln(1+x) + (1-x) ln(1-x))`, with `f(0) = 0` and
/// `f(1) = sqrt(ln 4)`.
pub fn f_eval(x: &Real, prec: u32) -> Result<Real> {
    Ok(f_squared(x, prec + 2)?.sqrt().with_prec(prec))
}

/// `sqrt(ln 4)`, the top of the range of `f`.
pub fn f_max(prec: u32) -> Real {
    Real::ln2(prec + 4).mul_pow2(1).sqrt().with_prec(prec)
}

/// The `x` in `[0, 1]` with `f(x) = u`, bracketed to width `tol`.
///
/// Solves `f(x)^2 = u^2`, whose left side is smooth and convex with slope
/// `2 atanh(x)`.
pub fn f_inv(u: &Real, prec: u32, tol: &Real) -> Result<Real> {
    if u.is_sign_negative() {
        return Err(Error::Domain(format!("f_inv argument {u} is negative")));
    }
    let work = prec + 8;
    let target = u.with_prec(work).square();
    let top = Real::ln2(work).mul_pow2(1);
    if u.is_zero() {
        return Ok(Real::zero(prec));
    }
    // Arguments within rounding of sqrt(ln 4), such as `f_max` itself, map to 1.
    let slack = top.mul_pow2(4 - u.prec().min(prec) as i32);
    if target > &top + &slack {
        return Err(Error::Domain(format!(
            "f_inv argument {u} exceeds sqrt(ln 4)"
        )));
    }
    if target >= &top - &slack {
        return Ok(Real::one(prec));
    }
    // f(x)^2 = x^2 + x^4/6 + ..., so u / sqrt(1 + u^2/6) is close.
    let uf = u.to_f64();
    let guess = (uf / (1.0 + uf * uf / 6.0).sqrt()).min(1.0 - 1e-12);
    let res = RootSearch::new(&Real::zero(work), &Real::one(work), tol, work)
        .guess(&Real::from_f64(guess, work))
        .endpoint_signs(-1, 1)
        .run(|x| {
            let value = f_squared(x, work)? - &target;
            let slope = if *x < 1.0 {
                x.atanh().mul_pow2(1)
            } else {
                Real::zero(work)
            };
            Ok(Sample::with_slope(value, slope))
        })?;
    Ok(res.root.with_prec(prec))
}

/// Default bracket width for [`f_inv`] at `prec` bits.
pub fn default_tolerance(prec: u32) -> Real {
    Real::pow2(4 - prec as i32, prec)
}

type Generator = Arc<dyn Fn(&Real) -> Real + Send + Sync>;

/// A law with a finite moment generator, `R(t) = E exp(tX)`.
#[derive(Clone)]
pub struct MgfSpec {
    pub name: String,
    r: Generator,
    r_prime: Generator,
    /// Open interval of `t` on which `R` is finite.
    pub domain: (f64, f64),
    /// `E X = psi(0)`.
    pub mean: Real,
    /// Essential infimum and supremum of `X`; `psi` maps the domain onto
    /// the open interval between them.
    pub support: (f64, f64),
}

impl fmt::Debug for MgfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MgfSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("mean", &self.mean)
            .field("support", &self.support)
            .finish()
    }
}

const REGISTRATION_PREC: u32 = 128;

impl MgfSpec {
    /// Registers a law, checking `R(0) = 1`, `R > 0`, `psi(0) = mean` and
    /// that `psi` increases on a grid inside the domain.
    pub fn new<R, D>(
        name: impl Into<String>,
        r: R,
        r_prime: D,
        domain: (f64, f64),
        mean: Real,
        support: (f64, f64),
    ) -> Result<Self>
    where
        R: Fn(&Real) -> Real + Send + Sync + 'static,
        D: Fn(&Real) -> Real + Send + Sync + 'static,
    {
        let spec = MgfSpec {
            name: name.into(),
            r: Arc::new(r),
            r_prime: Arc::new(r_prime),
            domain,
            mean,
            support,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidMgf {
            name: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(self.invalid("domain must contain a neighbourhood of 0"));
        }
        if !(self.support.0 < self.support.1) {
            return Err(self.invalid("empty support"));
        }
        let p = REGISTRATION_PREC;
        let eps = Real::pow2(8 - p as i32, p);
        let zero = Real::zero(p);
        if ((self.r)(&zero) - 1).abs() > eps {
            return Err(self.invalid("R(0) must equal 1"));
        }
        if (self.psi_unchecked(&zero) - &self.mean).abs() > eps {
            return Err(self.invalid("psi(0) must equal the mean"));
        }
        let t_lo = lo.max(-8.0);
        let t_hi = hi.min(8.0);
        let n = 32;
        let mut prev: Option<Real> = None;
        for j in 1..n {
            let t = Real::from_f64(t_lo + (t_hi - t_lo) * f64::from(j) / f64::from(n), p);
            let rt = (self.r)(&t);
            if !(rt > 0.0) || !rt.is_finite() {
                return Err(self.invalid(format!("R({t:.6}) is not positive and finite")));
            }
            let psi = self.psi_unchecked(&t);
            if let Some(prev) = &prev {
                if psi <= *prev {
                    return Err(self.invalid(format!("psi is not increasing near t = {t:.6}")));
                }
            }
            prev = Some(psi);
        }
        Ok(())
    }

    pub fn r(&self, t: &Real) -> Real {
        (self.r)(t)
    }

    pub fn r_prime(&self, t: &Real) -> Real {
        (self.r_prime)(t)
    }

    fn psi_unchecked(&self, t: &Real) -> Real {
        (self.r_prime)(t) / (self.r)(t)
    }

    fn check_domain(&self, t: &Real) -> Result<()> {
        if !(*t > self.domain.0 && *t < self.domain.1) {
            return Err(Error::Domain(format!(
                "t = {t} is outside the domain ({}, {}) of {}",
                self.domain.0, self.domain.1, self.name
            )));
        }
        Ok(())
    }

    fn check_range(&self, x: &Real) -> Result<()> {
        if !(*x > self.support.0 && *x < self.support.1) {
            return Err(Error::Range(format!(
                "x = {x} is not strictly inside ({}, {}), the range of psi for {}",
                self.support.0, self.support.1, self.name
            )));
        }
        Ok(())
    }

    /// `X = +1` or `-1` with equal probability: `R(t) = cosh t`.
    pub fn rademacher() -> Self {
        MgfSpec::new(
            "rademacher",
            |t| t.cosh(),
            |t| t.sinh(),
            (f64::NEG_INFINITY, f64::INFINITY),
            Real::zero(REGISTRATION_PREC),
            (-1.0, 1.0),
        )
        .expect("built-in law is valid")
    }

    /// `R(t) = exp(t^2 / 2)`.
    pub fn standard_normal() -> Self {
        MgfSpec::new(
            "normal",
            |t| t.square().mul_pow2(-1).exp(),
            |t| t * t.square().mul_pow2(-1).exp(),
            (f64::NEG_INFINITY, f64::INFINITY),
            Real::zero(REGISTRATION_PREC),
            (f64::NEG_INFINITY, f64::INFINITY),
        )
        .expect("built-in law is valid")
    }

    /// `X = +1` with probability `p`, `-1` otherwise.
    pub fn bernoulli_pm(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "bernoulli parameter {p} is not in (0, 1)"
            )));
        }
        let mean = Real::from_f64(p, REGISTRATION_PREC) * 2 - 1;
        MgfSpec::new(
            format!("bernoulli:{p}"),
            move |t| {
                let prec = t.prec();
                let p = Real::from_f64(p, prec);
                let q = Real::one(prec) - &p;
                p * t.exp() + q * (-t).exp()
            },
            move |t| {
                let prec = t.prec();
                let p = Real::from_f64(p, prec);
                let q = Real::one(prec) - &p;
                p * t.exp() - q * (-t).exp()
            },
            (f64::NEG_INFINITY, f64::INFINITY),
            mean,
            (-1.0, 1.0),
        )
    }

    /// `R(t) = exp(lambda (e^t - 1))`.
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "poisson rate {lambda} must be positive"
            )));
        }
        MgfSpec::new(
            format!("poisson:{lambda}"),
            move |t| (Real::from_f64(lambda, t.prec()) * t.exp_m1()).exp(),
            move |t| {
                let l = Real::from_f64(lambda, t.prec());
                &l * &t.exp() * (&l * &t.exp_m1()).exp()
            },
            (f64::NEG_INFINITY, f64::INFINITY),
            Real::from_f64(lambda, REGISTRATION_PREC),
            (0.0, f64::INFINITY),
        )
    }

    /// Parses `rademacher`, `normal`, `bernoulli:<p>` or `poisson:<lambda>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let param = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Domain(format!("`{name}` needs a parameter")))?;
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad parameter `{a}` in `{name}`")))
        };
        match (head, arg) {
            ("rademacher", None) => Ok(MgfSpec::rademacher()),
            ("normal", None) => Ok(MgfSpec::standard_normal()),
            ("bernoulli", a) => MgfSpec::bernoulli_pm(param(a)?),
            ("poisson", a) => MgfSpec::poisson(param(a)?),
            _ => Err(Error::Domain(format!("unknown distribution `{name}`"))),
        }
    }
}

/// `psi(t) = R'(t) / R(t)`.
pub fn psi(spec: &MgfSpec, t: &Real) -> Result<Real> {
    spec.check_domain(t)?;
    Ok(spec.psi_unchecked(t))
}

/// The `t` with `psi(t) = x`.
pub fn alpha(spec: &MgfSpec, x: &Real, prec: u32) -> Result<Real> {
    spec.check_range(x)?;
    let work = prec + 16;
    let x = x.with_prec(work);
    let mean = spec.mean.with_prec(work);
    if x == mean {
        return Ok(Real::zero(prec));
    }
    let upward = x > mean;
    let target = |t: &Real| -> Real { spec.psi_unchecked(t) - &x };

    // Expand [0, 2^j] (or its mirror) until psi straddles x.
    let limit = if upward {
        spec.domain.1
    } else {
        -spec.domain.0
    };
    let mut inner = Real::zero(work);
    let mut outer_mag = 1.0f64;
    let mut found = None;
    for _ in 0..200 {
        if outer_mag >= limit {
            outer_mag = (inner.to_f64().abs() + limit) / 2.0;
        }
        let outer = Real::from_f64(if upward { outer_mag } else { -outer_mag }, work);
        let v = target(&outer);
        if !v.is_finite() {
            break;
        }
        if (upward && v > 0.0) || (!upward && v < 0.0) {
            found = Some(outer);
            break;
        }
        if v.is_zero() {
            return Ok(outer.with_prec(prec));
        }
        inner = outer;
        outer_mag *= 2.0;
    }
    let outer = found.ok_or_else(|| {
        Error::Range(format!(
            "psi of {} does not reach {x} within its domain",
            spec.name
        ))
    })?;
    let (lo, hi) = if upward {
        (inner, outer)
    } else {
        (outer, inner)
    };
    let scale = hi.abs().max(lo.abs()).max(Real::one(work));
    let tol = scale.mul_pow2(4 - work as i32);
    let res = RootSearch::new(&lo, &hi, &tol, work).run(|t| Ok(Sample::new(target(t))))?;
    Ok(res.root.with_prec(prec))
}

/// `ln rho(x) = ln R(alpha(x)) - x alpha(x)`, always `<= 0`.
pub fn log_rho(spec: &MgfSpec, x: &Real, prec: u32) -> Result<Real> {
    let work = prec + 16;
    let a = alpha(spec, x, work)?;
    let v = spec.r(&a).ln() - x.with_prec(work) * &a;
    Ok(v.with_prec(prec))
}

/// The Chernoff function `rho(x) = R(alpha(x)) exp(-x alpha(x))`.
pub fn rho(spec: &MgfSpec, x: &Real, prec: u32) -> Result<Real> {
    Ok(log_rho(spec, x, prec + 4)?.exp().with_prec(prec))
}

/// The `y > 0` solving `rho_F(x) = rho_G(y) = exp(-y^2 / 2)`.
///
/// Rounding can leave `-2 ln rho` a hair below zero for `x` next to the
/// mean; such values are taken as zero.
pub fn couple_to_gauss(spec: &MgfSpec, x: &Real, prec: u32) -> Result<Real> {
    let mean = spec.mean.with_prec(x.prec().max(prec));
    if *x <= mean {
        return Err(Error::Domain(format!(
            "coupling needs x above the mean {mean} of {}, got {x}",
            spec.name
        )));
    }
    let two_rate = -log_rho(spec, x, prec + 4)?.mul_pow2(1);
    let two_rate = two_rate.max(Real::zero(prec + 4));
    Ok(two_rate.sqrt().with_prec(prec))
}

/// `rho(x)^m`, the Chernoff estimate of `P(X_1 + ... + X_m >= m x)`.
pub fn chernoff_tail_estimate(spec: &MgfSpec, m: u32, x: &Real, prec: u32) -> Result<Real> {
    if m == 0 {
        return Ok(Real::one(prec));
    }
    let mean = spec.mean.with_prec(x.prec().max(prec));
    if *x <= mean {
        return Err(Error::Domain(format!(
            "Chernoff estimate needs x above the mean {mean}, got {x}"
        )));
    }
    let lr = log_rho(spec, x, prec + 16)?;
    Ok((lr * i64::from(m)).exp().with_prec(prec))
}
