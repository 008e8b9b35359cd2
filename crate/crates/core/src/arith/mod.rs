//! Exact rational arithmetic, integer combinatorics and error-bounded
//! logarithms.

mod combin;
mod precise;
mod rational;

pub use combin::{binomial, factorial, falling_factorial, multinomial_coeff};
pub use precise::{exp_neg_rational, log_rational, PrecisionFloat, DEFAULT_MIN_BITS, GUARD_BITS};
pub use rational::ExactRational;
