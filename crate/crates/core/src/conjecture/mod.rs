//! The conjectured inequalities for the quantile coupling, and the data
//! behind the quantile-transform and blow-up error pictures.
//!
//! The blow-up error is
//! `Delta_{k,m} = 10 (2k - m - 1 - m f^-1(Q^-1(p_{k,m}) / sqrt m))`
//! for even `m` and `m/2 < k <= m`; the conjecture is `0 < Delta < 1.036`.

mod delta;
mod figures;
mod quantile;
mod sweep;
mod weak;

pub use delta::{
    check_sharp, check_sharp_with_bounds, delta, delta_from_tail, delta_upper_bound, deltas_for,
    sharp_step_bound, CertifiedResult, DeltaRecord, Verdict, TIGHT_MARGIN,
};
pub use figures::{
    band_label, figure1_data, figure2_data, CurvePoint, Figure1, Figure2Curve, StepSegment,
};
pub use quantile::{
    margin_grid, margins_on_grid, psi_m, sharp_margin, smooth_transform, step_function,
    tusnady_margin, MarginSample, QuantileTransform, SharpMargin, StepFunction,
    BREAKPOINT_OFFSET_EXP,
};
pub use sweep::{sweep, SweepReport, Violation};
pub use weak::{check_weak, check_weak_with_tail};
