use rayon::prelude::*;

use crate::binomial::tail_probs;
use crate::error::{Error, Result};
use crate::numerics::Real;

use super::delta::{delta_from_tail, delta_upper_bound, DeltaRecord};

/// A point where the conjectured range was not met, or could not be evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub m: u32,
    pub k: u32,
    pub reason: String,
}

/// All `Delta_{k,m}` for even `m <= m_max`, with aggregates.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub m_max: u32,
    /// Ordered by `m`, then `k`.
    pub records: Vec<DeltaRecord>,
    pub delta_min: Real,
    pub delta_max: Real,
    pub argmax: (u32, u32),
    pub violations: Vec<Violation>,
}

pub(crate) fn check_even_max(m_max: u32) -> Result<()> {
    if m_max < 2 || m_max % 2 != 0 {
        return Err(Error::Domain(format!(
            "m_max must be even and at least 2, got {m_max}"
        )));
    }
    Ok(())
}

/// Records (or failures) for one `m`, increasing `k`.
pub(crate) fn evaluate_m(m: u32, prec: u32) -> Vec<std::result::Result<DeltaRecord, Violation>> {
    let tails = match tail_probs(m) {
        Ok(t) => t,
        Err(e) => {
            return vec![Err(Violation {
                m,
                k: 0,
                reason: e.to_string(),
            })]
        }
    };
    tails
        .into_iter()
        .map(|(k, p)| {
            delta_from_tail(m, k, p, prec).map_err(|e| Violation {
                m,
                k,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Evaluates every even `m <= m_max`. Distinct `m` run on the current rayon
/// pool; the result order does not depend on scheduling.
pub fn sweep(m_max: u32, prec: u32) -> Result<SweepReport> {
    check_even_max(m_max)?;
    let ms: Vec<u32> = (1..=m_max / 2).map(|h| 2 * h).collect();
    let per_m: Vec<_> = ms.par_iter().map(|&m| evaluate_m(m, prec)).collect();

    let upper = delta_upper_bound();
    let mut records = Vec::new();
    let mut violations = Vec::new();
    for outcome in per_m.into_iter().flatten() {
        match outcome {
            Ok(rec) => {
                let d = rec.delta.as_float();
                if *d <= 0 {
                    violations.push(Violation {
                        m: rec.m,
                        k: rec.k,
                        reason: format!("delta {} <= 0", rec.delta),
                    });
                } else if *d >= upper {
                    violations.push(Violation {
                        m: rec.m,
                        k: rec.k,
                        reason: format!("delta {} >= 1.036", rec.delta),
                    });
                }
                records.push(rec);
            }
            Err(v) => violations.push(v),
        }
    }

    let first = records
        .first()
        .ok_or_else(|| Error::Domain("sweep produced no records".into()))?;
    let mut delta_min = first.delta.clone();
    let mut delta_max = first.delta.clone();
    let mut argmax = (first.m, first.k);
    for rec in &records[1..] {
        if rec.delta < delta_min {
            delta_min = rec.delta.clone();
        }
        if rec.delta > delta_max {
            delta_max = rec.delta.clone();
            argmax = (rec.m, rec.k);
        }
    }
    Ok(SweepReport {
        m_max,
        records,
        delta_min,
        delta_max,
        argmax,
        violations,
    })
}
