//! Double-precision reference implementations, independent of the
//! multi-precision code under test.

#![allow(dead_code)]

use statrs::function::erf::{erfc, erfc_inv};

/// `Q^-1(p)` through the complementary error function.
pub fn q_inv_f64(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

pub fn q_f64(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `f(x)` with `ln_1p` on both logarithms.
pub fn f_f64(x: f64) -> f64 {
    let g = (1.0 + x) * x.ln_1p()
        + if x < 1.0 {
            (1.0 - x) * (-x).ln_1p()
        } else {
            0.0
        };
    g.max(0.0).sqrt()
}

/// `f^-1(u)` by plain bisection on `[0, 1]`.
pub fn f_inv_f64(u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_f64(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Plain double-precision loop for one even `m`: accumulate binomial
/// coefficients from the bottom of the support, invert, and record
/// `10 (m - 2i - 1 - m b)`. Returns `(k, y, delta)` with `k = m - i`.
pub fn reference_deltas(m: u32) -> Vec<(u32, f64, f64)> {
    let mf = f64::from(m);
    let divisor = 2f64.powi(m as i32);
    let mut sum = 0.0;
    let mut bin = 1.0;
    let mut out = Vec::new();
    for i in 0..m / 2 {
        sum += bin;
        let y = q_inv_f64(sum / divisor) / mf.sqrt();
        let b = f_inv_f64(y);
        out.push((m - i, y, 10.0 * (mf - 2.0 * f64::from(i) - 1.0 - mf * b)));
        bin = (mf - f64::from(i)) * bin / f64::from(i + 1);
    }
    out
}

/// `Q(x) = 1/2 - int_0^x phi` by composite Simpson with `n` panels.
pub fn q_simpson(x: f64, n: usize) -> f64 {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let n = n + n % 2;
    let h = x / n as f64;
    let mut s = phi(0.0) + phi(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * phi(i as f64 * h);
    }
    0.5 - s * h / 3.0
}
