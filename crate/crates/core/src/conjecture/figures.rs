use crate::error::{Error, Result};
use crate::numerics::Real;
use crate::rate::{f_eval, f_max};

use super::delta::{deltas_for, DeltaRecord};
use super::sweep::{check_even_max, sweep};

/// One horizontal piece of the rescaled step function: `xi` on `[eta_lo, eta_hi)`.
#[derive(Clone, Debug)]
pub struct StepSegment {
    pub eta_lo: Real,
    pub eta_hi: Real,
    pub xi: Real,
}

/// A point `(eta, xi)` of a plotted curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub eta: Real,
    pub xi: Real,
}

/// The three series of the quantile-transform picture at one even `m`, in
/// the rescaled axes `eta = y / m` and `xi = s / m`.
#[derive(Clone, Debug)]
pub struct Figure1 {
    pub m: u32,
    /// Non-negative half of `Psi_m`: `m / 2` steps from `xi = 0` up to the
    /// last step below the top.
    pub steps: Vec<StepSegment>,
    /// `(f(x), x)` for `x` on a grid of `[0, 1]`.
    pub limit: Vec<CurvePoint>,
    /// `(y_k, Delta_k)` for `m / 2 < k <= m`, increasing `k`.
    pub delta: Vec<CurvePoint>,
}

/// Series for the quantile-transform picture. `grid_step` spaces the
/// limit curve; the endpoint `x = 1` is always included.
pub fn figure1_data(m: u32, prec: u32, grid_step: f64) -> Result<Figure1> {
    check_even_max(m)?;
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::Domain(format!(
            "grid step must lie in (0, 1], got {grid_step}"
        )));
    }
    let records = deltas_for(m, prec)?;
    let half = m / 2;
    let mi = i64::from(m);

    // records[i] holds k = half + 1 + i; the step at k' runs from y_{k'} to y_{k'+1}.
    let steps = (half..m)
        .map(|kp| {
            let eta_lo = if kp == half {
                Real::zero(prec)
            } else {
                records[(kp - half - 1) as usize].y.clone()
            };
            StepSegment {
                eta_lo,
                eta_hi: records[(kp - half) as usize].y.clone(),
                xi: Real::ratio(2 * i64::from(kp) - mi, mi, prec),
            }
        })
        .collect();

    let step = Real::from_f64(grid_step, prec);
    let mut limit = Vec::new();
    let mut i = 0i64;
    loop {
        let x = &step * i;
        if x >= 1.0 {
            break;
        }
        limit.push(CurvePoint {
            eta: f_eval(&x, prec)?,
            xi: x,
        });
        i += 1;
    }
    limit.push(CurvePoint {
        eta: f_max(prec),
        xi: Real::one(prec),
    });

    let delta = records
        .iter()
        .map(|r| CurvePoint {
            eta: r.y.clone(),
            xi: r.delta.clone(),
        })
        .collect();
    Ok(Figure1 {
        m,
        steps,
        limit,
        delta,
    })
}

/// Colour band of an `m` value in the blow-up error picture.
pub fn band_label(m: u32) -> &'static str {
    match m {
        0..=200 => "0<m<=200",
        201..=400 => "200<m<=400",
        401..=600 => "400<m<=600",
        601..=800 => "600<m<=800",
        801..=1000 => "800<m<=1000",
        _ => "m>1000",
    }
}

/// One curve `(y_k, Delta_k)` of the blow-up error picture.
#[derive(Clone, Debug)]
pub struct Figure2Curve {
    pub m: u32,
    pub band: &'static str,
    pub points: Vec<DeltaRecord>,
}

/// One curve per even `m <= m_max`, increasing `m`. Points that fail to
/// evaluate are left out; [`sweep`] reports them.
pub fn figure2_data(m_max: u32, prec: u32) -> Result<Vec<Figure2Curve>> {
    let report = sweep(m_max, prec)?;
    let mut curves: Vec<Figure2Curve> = Vec::new();
    for rec in report.records {
        match curves.last_mut() {
            Some(c) if c.m == rec.m => c.points.push(rec),
            _ => curves.push(Figure2Curve {
                m: rec.m,
                band: band_label(rec.m),
                points: vec![rec],
            }),
        }
    }
    Ok(curves)
}
