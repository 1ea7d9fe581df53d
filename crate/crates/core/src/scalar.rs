//! Coefficient types.
//!
//! Series arithmetic is exact by default ([`Rational`]). The `f64`
//! implementation exists for Monte Carlo sweeps, where the only zero test is
//! the tolerance-based [`Scalar::is_negligible`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar: Num + Signed + PartialOrd + Clone + Debug + Send + Sync + 'static {
    fn from_u64(n: u64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Zero test used by relative-degree measurement. Exact for rationals;
    /// relative to `scale` for floats.
    fn is_negligible(&self, scale: f64) -> bool;
}

/// Relative tolerance under which a float coefficient counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

impl Scalar for Rational {
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // num-rational gives up when numerator or denominator overflow f64
            let sign = if self.is_negative() { -1.0 } else { 1.0 };
            let n = self.numer().abs();
            let d = self.denom().clone();
            let shift = n.bits() as i64 - d.bits() as i64;
            let (n, d, e) = if shift > 0 {
                (n, d << shift as usize, shift)
            } else {
                (n << (-shift) as usize, d, shift)
            };
            let q = ToPrimitive::to_f64(&BigRational::new(n, d)).unwrap_or(f64::NAN);
            sign * q * 2f64.powi(e as i32)
        })
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_ZERO_TOL * scale.max(f64::MIN_POSITIVE)
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// Parses `"p"`, `"p/q"` or a plain decimal such as `"0.25"` or `"-1.5e-2"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Ok(r) = text.parse::<BigRational>() {
        if r.denom().is_zero() {
            return None;
        }
        return Some(r);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = match mantissa.split_once('.') {
        Some((w, f)) => (w, f),
        None => (mantissa, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}
