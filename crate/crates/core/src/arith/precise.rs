//! Fixed-point reals with a rigorous absolute error bound, and the natural
//! logarithm / exponential of exact rationals evaluated into them.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExactRational;
use crate::error::{domain, Result};

/// Default number of guaranteed bits for logarithms.
pub const DEFAULT_MIN_BITS: u32 = 50;

/// Extra fractional bits carried beyond the requested precision so that
/// accumulated rounding stays far below `2^-min_bits`.
pub const GUARD_BITS: u32 = 40;

/// A real number `mantissa * 2^-scale` known to lie within
/// `error * 2^-scale` of the true value.
///
/// With the default precision the scale is 90 fractional bits, so the
/// stored value carries well over 60 significant bits for every magnitude
/// that shows up in practice.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrecisionFloat {
    mantissa: BigInt,
    error: BigUint,
    scale: u32,
}

impl PrecisionFloat {
    pub fn zero(scale: u32) -> Self {
        Self {
            mantissa: BigInt::zero(),
            error: BigUint::zero(),
            scale,
        }
    }

    /// `floor(r * 2^scale)`, exact when the rational is dyadic at this scale.
    pub fn from_rational(r: &ExactRational, scale: u32) -> Self {
        let scaled: BigInt = r.numer() << scale as usize;
        let (q, rem) = scaled.div_mod_floor(r.denom());
        let error = if rem.is_zero() { BigUint::zero() } else { BigUint::one() };
        Self {
            mantissa: q,
            error,
            scale,
        }
    }

    pub(crate) fn from_parts(mantissa: BigInt, error: BigUint, scale: u32) -> Self {
        Self { mantissa, error, scale }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    /// Error bound in units of `2^-scale`.
    pub fn error_ulps(&self) -> &BigUint {
        &self.error
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }

    pub fn value(&self) -> ExactRational {
        dyadic(self.mantissa.clone(), self.scale)
    }

    pub fn error_bound(&self) -> ExactRational {
        dyadic(BigInt::from(self.error.clone()), self.scale)
    }

    /// Certified lower end of the enclosing interval.
    pub fn lower(&self) -> ExactRational {
        dyadic(&self.mantissa - BigInt::from(self.error.clone()), self.scale)
    }

    /// Certified upper end of the enclosing interval.
    pub fn upper(&self) -> ExactRational {
        dyadic(&self.mantissa + BigInt::from(self.error.clone()), self.scale)
    }

    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.mantissa, self.scale)
    }

    pub fn error_bound_f64(&self) -> f64 {
        big_to_f64(&BigInt::from(self.error.clone()), self.scale)
    }

    /// Same value at another scale. Going down rounds toward minus
    /// infinity and widens the error accordingly.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = (scale - self.scale) as usize;
                Self {
                    mantissa: &self.mantissa << d,
                    error: &self.error << d,
                    scale,
                }
            }
            Ordering::Less => {
                let d = self.scale - scale;
                let divisor = BigInt::one() << d as usize;
                let (q, rem) = self.mantissa.div_mod_floor(&divisor);
                let mut error = ceil_shr(&self.error, d);
                if !rem.is_zero() {
                    error += 1u32;
                }
                Self {
                    mantissa: q,
                    error,
                    scale,
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let scale = self.scale.max(other.scale);
        let a = self.rescale(scale);
        let b = other.rescale(scale);
        Self {
            mantissa: a.mantissa + b.mantissa,
            error: a.error + b.error,
            scale,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            error: self.error.clone(),
            scale: self.scale,
        }
    }

    pub fn add_rational(&self, r: &ExactRational) -> Self {
        self.add(&Self::from_rational(r, self.scale))
    }

    /// Multiply by an exact rational at the current scale.
    pub fn mul_rational(&self, r: &ExactRational) -> Self {
        let num = &self.mantissa * r.numer();
        let (q, rem) = num.div_mod_floor(r.denom());
        let abs_num = r.numer().magnitude();
        let den = r.denom().magnitude();
        let mut error = (&self.error * abs_num).div_ceil(den);
        if !rem.is_zero() {
            error += 1u32;
        }
        Self {
            mantissa: q,
            error,
            scale: self.scale,
        }
    }

    /// Certified comparison with an exact rational: `None` when the
    /// rational lies inside the error interval and the value is inexact.
    pub fn cmp_rational(&self, r: &ExactRational) -> Option<Ordering> {
        if self.is_exact() {
            return Some(self.value().cmp(r));
        }
        if &self.upper() < r {
            Some(Ordering::Less)
        } else if &self.lower() > r {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Certified comparison of two enclosures.
    pub fn cmp_certified(&self, other: &Self) -> Option<Ordering> {
        let diff = self.sub(other);
        diff.cmp_rational(&ExactRational::zero())
    }

    pub fn max_with_zero(&self) -> Self {
        if self.mantissa.is_negative() {
            Self::zero(self.scale)
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for PrecisionFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.14e} ± {:.1e}", self.to_f64(), self.error_bound_f64())
    }
}

impl fmt::Debug for PrecisionFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn dyadic(mantissa: BigInt, scale: u32) -> ExactRational {
    ExactRational::new(mantissa, BigInt::one() << scale as usize).expect("nonzero power of two")
}

fn ceil_shr(x: &BigUint, d: u32) -> BigUint {
    let divisor = BigUint::one() << d as usize;
    x.div_ceil(&divisor)
}

fn big_to_f64(m: &BigInt, scale: u32) -> f64 {
    let bits = m.bits();
    let (top, shift) = if bits > 64 {
        let s = bits - 64;
        (m >> s as usize, s as i64)
    } else {
        (m.clone(), 0)
    };
    let top = top.to_f64().unwrap_or(0.0);
    top * 2f64.powi((shift - scale as i64) as i32)
}

/// `2 atanh(y) * 2^scale` for `0 <= y <= 1/3`, with its error in ulps.
fn two_atanh_scaled(yn: &BigUint, yd: &BigUint, scale: u32) -> (BigUint, BigUint) {
    let mut power: BigUint = (yn << scale as usize) / yd;
    let y2n = yn * yn;
    let y2d = yd * yd;
    let mut sum = BigUint::zero();
    let mut terms = 0u64;
    let mut odd = 1u64;
    while !power.is_zero() {
        sum += &power / odd;
        terms += 1;
        odd += 2;
        power = power * &y2n / &y2d;
    }
    // power error stays below 9/8 ulp; each added term loses at most
    // 2.2 ulps and the truncated tail is below 1.3 ulps.
    let err = BigUint::from(3 * terms + 3);
    (sum << 1usize, err << 1usize)
}

fn ln2_scaled(scale: u32) -> (BigUint, BigUint) {
    static CACHE: OnceLock<Mutex<HashMap<u32, (BigUint, BigUint)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("ln2 cache poisoned").get(&scale) {
        return hit.clone();
    }
    // ln 2 = 2 atanh(1/3)
    let value = two_atanh_scaled(&BigUint::one(), &BigUint::from(3u32), scale);
    cache.lock().expect("ln2 cache poisoned").insert(scale, value.clone());
    value
}

/// Natural logarithm of a positive rational, accurate to
/// `2^-min_bits * max(1, |ln r|)`. The result depends only on the reduced
/// rational and `min_bits`.
pub fn log_rational(r: &ExactRational, min_bits: u32) -> Result<PrecisionFloat> {
    if !r.is_positive() {
        return Err(domain(format!("logarithm of non-positive value {r}")));
    }
    let scale = min_bits + GUARD_BITS;
    if r.is_one() {
        return Ok(PrecisionFloat::zero(scale));
    }
    let mut num = r.numer().magnitude().clone();
    let mut den = r.denom().magnitude().clone();
    let mut exp = num.bits() as i64 - den.bits() as i64;
    if exp > 0 {
        den <<= exp as usize;
    } else if exp < 0 {
        num <<= (-exp) as usize;
    }
    // now num/den lies in (1/2, 2); pull it into [2/3, 4/3]
    if BigUint::from(3u32) * &num > BigUint::from(4u32) * &den {
        den <<= 1usize;
        exp += 1;
    } else if BigUint::from(3u32) * &num < BigUint::from(2u32) * &den {
        num <<= 1usize;
        exp -= 1;
    }

    let negative = num < den;
    let yn = if negative { &den - &num } else { &num - &den };
    let yd = &num + &den;
    let (atanh, atanh_err) = two_atanh_scaled(&yn, &yd, scale);
    let mut mantissa = BigInt::from(atanh);
    if negative {
        mantissa = -mantissa;
    }
    let mut result = PrecisionFloat::from_parts(mantissa, atanh_err, scale);

    if exp != 0 {
        let mag = exp.unsigned_abs();
        let extra = 64 - mag.leading_zeros() + 1;
        let (l2, l2_err) = ln2_scaled(scale + extra);
        let mut m = BigInt::from(l2 * mag);
        if exp < 0 {
            m = -m;
        }
        let term = PrecisionFloat::from_parts(m, l2_err * mag, scale + extra).rescale(scale);
        result = result.add(&term);
    }
    Ok(result)
}

/// `exp(-x)` for an exact rational `x >= 0`.
pub fn exp_neg_rational(x: &ExactRational, min_bits: u32) -> Result<PrecisionFloat> {
    if x.is_negative() {
        return Err(domain(format!("exp_neg_rational expects x >= 0, got {x}")));
    }
    let scale = min_bits + GUARD_BITS;
    if x.is_zero() {
        return Ok(PrecisionFloat::from_rational(&ExactRational::one(), scale));
    }
    let mut work = scale + 8;
    loop {
        let (e_val, e_err) = exp_pos_scaled(x, work);
        // reciprocal error estimate below needs e_err <= e_val / 2
        if &e_err * 2u32 > e_val {
            work += 32;
            continue;
        }
        let one_sq = BigUint::one() << (2 * work) as usize;
        let recip = &one_sq / &e_val;
        let lo = &e_val - &e_err;
        let err = (&one_sq * &e_err).div_ceil(&(&e_val * &lo)) + 1u32;
        let r = PrecisionFloat::from_parts(BigInt::from(recip), err, work);
        return Ok(r.rescale(scale));
    }
}

/// `exp(x) * 2^scale` for `x > 0` by Taylor summation (all terms positive).
fn exp_pos_scaled(x: &ExactRational, scale: u32) -> (BigUint, BigUint) {
    let xn = x.numer().magnitude().clone();
    let xd = x.denom().magnitude().clone();
    let mut term = BigUint::one() << scale as usize;
    let mut term_err = BigUint::zero();
    let mut sum = BigUint::zero();
    let mut err = BigUint::zero();
    let mut i = 0u64;
    loop {
        sum += &term;
        err += &term_err;
        // ratio x / (i + 1) < 1/2 from here on: the rest is at most twice
        // the current term's true value
        let past_peak = BigUint::from(2 * (i + 1)) * &xd > BigUint::from(2u32) * &xn * 2u32;
        if term.is_zero() && past_peak {
            err += &term_err * 2u32 + 1u32;
            break;
        }
        let denom = &xd * (i + 1);
        term = &term * &xn / &denom;
        term_err = (&term_err * &xn).div_ceil(&denom) + 1u32;
        i += 1;
    }
    (sum, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 40-digit reference constants
    const LN2: &str = "0.6931471805599453094172321214581765680755";
    const LN3_2: &str = "0.4054651081081643819780131155195105237620";

    fn decimal(s: &str) -> ExactRational {
        let (int, frac) = s.split_once('.').unwrap();
        let digits = format!("{int}{frac}");
        let den = num_traits::pow(BigInt::from(10), frac.len());
        ExactRational::new(digits.parse::<BigInt>().unwrap(), den).unwrap()
    }

    fn within(p: &PrecisionFloat, reference: &ExactRational, tol: &ExactRational) -> bool {
        (p.value() - reference).abs() <= *tol
    }

    #[test]
    fn log_of_one_is_exact_zero() {
        let l = log_rational(&ExactRational::one(), 50).unwrap();
        assert!(l.is_exact());
        assert!(l.value().is_zero());
    }

    #[test]
    fn log_two_and_three_halves() {
        let tol = ExactRational::new(1, BigInt::one() << 50usize).unwrap();
        let l2 = log_rational(&ExactRational::from(2u64), 50).unwrap();
        assert!(within(&l2, &decimal(LN2), &tol));
        assert!(l2.error_bound() <= tol);
        let l32 = log_rational(&ExactRational::ratio(3, 2), 50).unwrap();
        assert!(within(&l32, &decimal(LN3_2), &tol));
        // the stated error bound must actually contain the truth
        let ref32 = decimal(LN3_2);
        let slack = ExactRational::new(1, BigInt::from(10).pow(39)).unwrap();
        assert!(l32.lower() <= &ref32 + &slack && &ref32 - &slack <= l32.upper());
    }

    #[test]
    fn log_rejects_non_positive() {
        assert!(log_rational(&ExactRational::zero(), 50).is_err());
        assert!(log_rational(&ExactRational::ratio(-1, 2), 50).is_err());
    }

    #[test]
    fn log_of_tiny_and_huge_values() {
        let tiny = ExactRational::new(1, BigInt::one() << 4000usize).unwrap();
        let l = log_rational(&tiny, 50).unwrap();
        let expected = -4000.0 * std::f64::consts::LN_2;
        assert!((l.to_f64() - expected).abs() < 1e-9);
        let bound = l.to_f64().abs() * 2f64.powi(-50);
        assert!(l.error_bound_f64() <= bound);
    }

    #[test]
    fn log_is_deterministic() {
        let r = ExactRational::ratio(1234567, 89);
        assert_eq!(log_rational(&r, 50).unwrap(), log_rational(&r, 50).unwrap());
        let same = ExactRational::ratio(2 * 1234567, 2 * 89);
        assert_eq!(log_rational(&r, 50).unwrap(), log_rational(&same, 50).unwrap());
    }

    #[test]
    fn exp_neg_matches_f64() {
        for (n, d) in [(1, 3), (0, 1), (5, 2), (45, 1), (1, 1000)] {
            let x = ExactRational::ratio(n, d);
            let e = exp_neg_rational(&x, 50).unwrap();
            let expected = (-(n as f64) / d as f64).exp();
            assert!((e.to_f64() - expected).abs() <= 1e-15 * expected.max(1e-300) + 1e-18);
            assert!(e.error_bound_f64() < 1e-15);
        }
    }

    #[test]
    fn exp_neg_one_contains_reference() {
        // e^-1 to 40 digits
        let reference = decimal("0.3678794411714423215955237701614608674458");
        let e = exp_neg_rational(&ExactRational::one(), 60).unwrap();
        let slack = ExactRational::new(1, BigInt::from(10).pow(39)).unwrap();
        assert!(e.lower() <= &reference + &slack && &reference - &slack <= e.upper());
    }

    #[test]
    fn rescale_down_keeps_enclosure() {
        let third = PrecisionFloat::from_rational(&ExactRational::ratio(1, 3), 100);
        let coarse = third.rescale(20);
        let exact = ExactRational::ratio(1, 3);
        assert!(coarse.lower() <= exact && exact <= coarse.upper());
    }

    #[test]
    fn mul_rational_keeps_enclosure() {
        let l = log_rational(&ExactRational::ratio(7, 3), 50).unwrap();
        let p = l.mul_rational(&ExactRational::ratio(-5, 11));
        let f = (7.0f64 / 3.0).ln() * (-5.0 / 11.0);
        assert!((p.to_f64() - f).abs() < 1e-15);
        assert!(p.error_bound_f64() < 1e-20);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn log_of_product_is_sum(an in 1i64..1_000_000, ad in 1i64..1_000_000,
                                 bn in 1i64..1_000_000, bd in 1i64..1_000_000) {
            let a = ExactRational::ratio(an, ad);
            let b = ExactRational::ratio(bn, bd);
            let lab = log_rational(&(&a * &b), 50).unwrap();
            let sum = log_rational(&a, 50).unwrap().add(&log_rational(&b, 50).unwrap());
            let diff = lab.sub(&sum);
            prop_assert!(diff.cmp_rational(&ExactRational::zero()).is_none()
                || diff.value().is_zero());
        }

        #[test]
        fn log_error_within_contract(n in 1i64..i64::MAX, d in 1i64..i64::MAX) {
            let r = ExactRational::ratio(n, d);
            let l = log_rational(&r, 50).unwrap();
            let magnitude = l.value().abs().max(ExactRational::one());
            let limit = magnitude * ExactRational::new(1, BigInt::one() << 50usize).unwrap();
            prop_assert!(l.error_bound() <= limit);
            let f = (n as f64).ln() - (d as f64).ln();
            prop_assert!((l.to_f64() - f).abs() < 1e-9);
        }
    }
}
