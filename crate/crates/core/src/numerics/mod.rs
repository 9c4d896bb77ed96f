//! Precision-parameterised reals, bracketed root finding and certified
//! comparison.

mod certify;
mod real;
mod root;

pub use certify::{
    certified_compare, enclose, precision_ladder, refine_until, CompareOutcome, Enclosure,
};
pub use real::{
    check_precision, decimal_digits, parse_decimal, Real, DEFAULT_PRECISION, MAX_PRECISION,
    MIN_PRECISION,
};
pub use root::{find_root_monotone, RootResult, RootSearch, Sample};
