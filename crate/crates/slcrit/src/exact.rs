//! Exact rational arithmetic shared by the classification and Kovacic layers.
//!
//! Everything downstream of [`crate::galois`] and [`crate::kovacic`] decides
//! set membership and solvability questions exactly, so the substrate is the
//! arbitrary-precision rational [`ExactRatio`] with a few helpers the number
//! crates do not provide directly: decimal/fraction parsing, exact square
//! roots, and float import that preserves the binary value bit for bit.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

/// Reduced fraction of arbitrary-precision integers, denominator positive.
pub type ExactRatio = BigRational;

/// Shorthand for small constants.
pub fn ratio(num: i64, den: i64) -> ExactRatio {
    ExactRatio::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for integers.
pub fn int(n: i64) -> ExactRatio {
    ExactRatio::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatioError {
    #[error("empty numeric literal")]
    Empty,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `-3`, `1/3`, `0.1`, `2.5e-3` into an exact rational.
///
/// Decimal literals convert exactly (`0.1` becomes 1/10, not the nearest
/// double), which is what keeps the classifier's truth table exact when
/// parameters arrive as text.
pub fn parse_ratio(text: &str) -> Result<ExactRatio, ParseRatioError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim()).ok_or_else(|| ParseRatioError::Invalid(s.into()))?;
        let d = parse_decimal(den.trim()).ok_or_else(|| ParseRatioError::Invalid(s.into()))?;
        if d.is_zero() {
            return Err(ParseRatioError::ZeroDenominator(s.into()));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(|| ParseRatioError::Invalid(s.into()))
}

/// Decimal literal with optional sign, fractional part, and exponent.
fn parse_decimal(s: &str) -> Option<ExactRatio> {
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, i32::from_str(e).ok()?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
    let scale = frac_part.len() as i32;
    let mut value = ExactRatio::from_integer(numer * BigInt::from(sign));
    let shift = exp - scale;
    let ten = BigInt::from(10);
    if shift >= 0 {
        value *= ExactRatio::from_integer(ten.pow(shift as u32));
    } else {
        value /= ExactRatio::from_integer(ten.pow((-shift) as u32));
    }
    Some(value)
}

/// Exact import of a finite double; every finite double is a dyadic rational.
pub fn from_f64_exact(x: f64) -> Option<ExactRatio> {
    ExactRatio::from_float(x)
}

pub fn to_f64(x: &ExactRatio) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact nonnegative square root, if `x` is the square of a rational.
pub fn sqrt_exact(x: &ExactRatio) -> Option<ExactRatio> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &sn * &sn == *num && &sd * &sd == *den {
        Some(ExactRatio::new(
            BigInt::from(sn),
            BigInt::from(sd),
        ))
    } else {
        None
    }
}

/// True iff `x` is the square of a rational.
pub fn is_perfect_square(x: &ExactRatio) -> bool {
    sqrt_exact(x).is_some()
}

/// True iff `x` is an odd integer.
pub fn is_odd_integer(x: &ExactRatio) -> bool {
    x.is_integer() && x.numer().magnitude() % BigUint::from(2u32) == BigUint::one()
}

/// Formats as `n` or `n/d`; the canonical exact print used in every report.
pub fn format_ratio(x: &ExactRatio) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
