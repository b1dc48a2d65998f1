//! Arithmetic modes.
//!
//! The Cauchy-matrix closed forms are written once, generically over
//! [`Field`], and instantiated for `f64` (the default float mode) and for
//! [`Rational`] (exact mode). Cauchy matrices are badly conditioned, so the
//! exact instantiation is what lets oracle tests compare bit for bit.

use std::fmt::Debug;

use num::bigint::BigInt;
use num::{BigRational, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used by the exact mode.
pub type Rational = BigRational;

/// Relative gap below which two float eigenvalues count as a repeated one.
pub const DUPLICATE_RELATIVE_GAP: f64 = 1e-10;

pub trait Field: Num + Signed + Clone + PartialOrd + Debug + 'static {
    /// Largest supported problem dimension in this arithmetic.
    const MAX_DIM: usize;
    /// Label used in reports.
    const MODE: &'static str;

    fn to_f64(&self) -> f64;

    fn from_u64(v: u64) -> Self;

    /// Whether `a` and `b` are too close to be treated as distinct eigenvalues.
    fn indistinct(a: &Self, b: &Self) -> bool;

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Field for f64 {
    const MAX_DIM: usize = 12;
    const MODE: &'static str = "float";

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn indistinct(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= DUPLICATE_RELATIVE_GAP * a.abs().max(b.abs())
    }
}

impl Field for Rational {
    const MAX_DIM: usize = 10;
    const MODE: &'static str = "rational";

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn indistinct(a: &Self, b: &Self) -> bool {
        a == b
    }
}

/// Parses an integer, decimal (`0.125`, `1.5e-3`) or fraction (`7/3`) literal.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidRational(text.to_string());
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match trimmed.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = trimmed[pos + 1..].parse().map_err(|_| bad())?;
            (&trimmed[..pos], exp)
        }
        None => (trimmed, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Largest denominator accepted by [`small_rational`].
pub const SMALL_DENOMINATOR: u64 = 1_000_000;
/// Largest numerator magnitude accepted by [`small_rational`].
pub const SMALL_NUMERATOR: u64 = 1_000_000_000_000;

/// Reads a float as the short decimal it was written as (`0.1` becomes
/// `1/10`) and returns it when numerator and denominator are both small.
pub fn small_rational(value: f64) -> Option<Rational> {
    if !value.is_finite() {
        return None;
    }
    let exact = parse_rational(&format!("{value}")).ok()?;
    is_small(&exact).then_some(exact)
}

/// Numerator and denominator within [`SMALL_NUMERATOR`] and [`SMALL_DENOMINATOR`].
pub fn is_small(value: &Rational) -> bool {
    value.denom() <= &BigInt::from(SMALL_DENOMINATOR)
        && value.numer().abs() <= BigInt::from(SMALL_NUMERATOR)
}
