//! Number types the risk algebra is generic over: `f64`, exact rationals and
//! first-order error-bounded floats.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    /// Builds a value from a table entry. Exact types need `exact`.
    fn from_entry(value: f64, exact: Option<&Rational>, abs_error: f64) -> Option<Self>;

    fn abs_error(&self) -> f64 {
        0.0
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::from_i64(1);
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_entry(value: f64, _: Option<&Rational>, _: f64) -> Option<Self> {
        Some(value)
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn from_entry(_: f64, exact: Option<&Rational>, _: f64) -> Option<Self> {
        exact.cloned()
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("non-finite value {v}")))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses decimal text such as `4.2`, `-3`, `1e-3` or `21/5` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a number: `{text}`"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: BigInt = all.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(num);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Recovers the short decimal a float was written as (`4.2` becomes 21/5).
pub fn rational_from_decimal_f64(v: f64) -> Result<Rational> {
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {v}")));
    }
    parse_rational(&format!("{v:e}"))
}

/// A float with a first-order absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub err: f64,
}

impl Bounded {
    pub fn new(value: f64, err: f64) -> Self {
        Bounded { value, err: err.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Bounded { value, err: 0.0 }
    }

    fn round(value: f64, err: f64) -> Self {
        Bounded { value, err: err + f64::EPSILON * value.abs() }
    }
}

impl Add for Bounded {
    type Output = Bounded;
    fn add(self, o: Bounded) -> Bounded {
        Bounded::round(self.value + o.value, self.err + o.err)
    }
}

impl Sub for Bounded {
    type Output = Bounded;
    fn sub(self, o: Bounded) -> Bounded {
        Bounded::round(self.value - o.value, self.err + o.err)
    }
}

impl Mul for Bounded {
    type Output = Bounded;
    fn mul(self, o: Bounded) -> Bounded {
        let err = self.value.abs() * o.err + o.value.abs() * self.err + self.err * o.err;
        Bounded::round(self.value * o.value, err)
    }
}

impl Div for Bounded {
    type Output = Bounded;
    fn div(self, o: Bounded) -> Bounded {
        let v = self.value / o.value;
        let slack = o.value.abs() - o.err;
        let err = if slack > 0.0 {
            (self.err + v.abs() * o.err) / slack
        } else {
            f64::INFINITY
        };
        Bounded::round(v, err)
    }
}

impl Neg for Bounded {
    type Output = Bounded;
    fn neg(self) -> Bounded {
        Bounded { value: -self.value, err: self.err }
    }
}

impl Scalar for Bounded {
    fn from_i64(v: i64) -> Self {
        Bounded::exact(v as f64)
    }
    fn from_rational(r: &Rational) -> Self {
        let v = rational_to_f64(r);
        Bounded::round(v, 0.0)
    }
    fn to_f64(&self) -> f64 {
        self.value
    }
    fn from_entry(value: f64, _: Option<&Rational>, abs_error: f64) -> Option<Self> {
        Some(Bounded::new(value, abs_error))
    }
    fn abs_error(&self) -> f64 {
        self.err
    }
}

/// `(2r-1)!!` with `(-1)!! = 1`.
pub fn double_factorial_odd(r: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = 2 * r as i64 - 1;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

pub fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_rational("4.2").unwrap(), ratio(21, 5));
        assert_eq!(parse_rational("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_rational("1.5e2").unwrap(), ratio(150, 1));
        assert_eq!(parse_rational("21/5").unwrap(), ratio(21, 5));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn short_decimal_from_float() {
        assert_eq!(rational_from_decimal_f64(4.2).unwrap(), ratio(21, 5));
        assert_eq!(rational_from_decimal_f64(7.0).unwrap(), ratio(7, 1));
        assert_eq!(rational_from_decimal_f64(0.001).unwrap(), ratio(1, 1000));
    }

    #[test]
    fn bounded_division_tracks_error() {
        let a = Bounded::new(1.0, 1e-10);
        let b = Bounded::new(2.0, 1e-10);
        let c = a / b;
        assert!((c.value - 0.5).abs() < 1e-16);
        assert!(c.err > 0.7e-10 && c.err < 1e-9);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(0), BigInt::from(1));
        assert_eq!(double_factorial_odd(1), BigInt::from(1));
        assert_eq!(double_factorial_odd(3), BigInt::from(15));
    }
}
