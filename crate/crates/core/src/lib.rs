//! Numerical certification of the quantile coupling between a symmetric
//! random walk and the Gaussian law.
//!
//! Probabilities of the walk are exact dyadic rationals; everything else is
//! evaluated in MPFR arithmetic at a chosen precision, and inequalities are
//! certified by comparing enclosures obtained at `P` and `2P` bits.

pub mod binomial;
pub mod conjecture;
pub mod error;
pub mod gaussian;
pub mod numerics;
pub mod rate;

pub use binomial::ExactDyadic;
pub use conjecture::{CertifiedResult, DeltaRecord, StepFunction, SweepReport, Verdict};
pub use error::{Error, Result};
pub use numerics::{Enclosure, Real, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION};
pub use rate::MgfSpec;
pub use rug::{Integer, Rational};
