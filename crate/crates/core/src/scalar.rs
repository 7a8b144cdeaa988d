//! Exact rationals and the scalar abstraction shared by the exact and
//! floating evaluation paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-1/2"`, `"0.25"` or `"1e-3"` into an exact rational.
/// Decimal literals are read exactly as written, not via `f64`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32 - 1;
    let ten = int(10);
    let mut r = Rational::from_integer(all) * pow_i(&ten, scale);
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Integer power with negative exponents allowed (base must be nonzero then).
pub fn pow_i(base: &Rational, e: i32) -> Rational {
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Binomial coefficient with the boundary convention used by every printed
/// sum in this crate: `binom(p, 0) = 1` for all integers `p` (including
/// negative ones), and zero when `q < 0`, when `q > p >= 0`, or when `p < 0`
/// and `q > 0`.
pub fn binom(p: i64, q: i64) -> BigInt {
    if q == 0 {
        return BigInt::one();
    }
    if q < 0 || p < 0 || q > p {
        return BigInt::zero();
    }
    let q = q.min(p - q);
    let mut acc = BigInt::one();
    for j in 0..q {
        acc = acc * BigInt::from(p - j) / BigInt::from(j + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Scalars the series and polynomial evaluators can run on: `f64` for
/// floating evaluation and [`Rational`] for exact evaluation.
pub trait Scalar: Clone + Debug + PartialEq + num_traits::Num + Neg<Output = Self> {
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// `Some(n)` when the value is exactly the integer `n <= 0`.
    fn as_nonpositive_integer(&self) -> Option<i64>;
    fn is_exact() -> bool;

    /// Integer power; negative exponents invert (caller guarantees nonzero).
    fn powi(&self, e: i32) -> Self {
        let mut base = self.clone();
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        if e < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    fn sum(terms: &[Self]) -> Self {
        terms.iter().fold(Self::zero(), |acc, t| acc + t.clone())
    }
}

impl Scalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn as_nonpositive_integer(&self) -> Option<i64> {
        (*self <= 0.0 && self.fract() == 0.0 && self.is_finite()).then_some(*self as i64)
    }
    fn is_exact() -> bool {
        false
    }
    fn powi(&self, e: i32) -> Self {
        f64::powi(*self, e)
    }

    /// Neumaier compensated summation.
    fn sum(terms: &[Self]) -> Self {
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for &t in terms {
            let n = s + t;
            if s.abs() >= t.abs() {
                c += (s - n) + t;
            } else {
                c += (t - n) + s;
            }
            s = n;
        }
        s + c
    }
}

impl Scalar for Rational {
    fn from_i64(n: i64) -> Self {
        int(n)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn as_nonpositive_integer(&self) -> Option<i64> {
        if self.is_integer() && !self.is_positive() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }
    fn is_exact() -> bool {
        true
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r).filter(|v| v.is_finite()) {
        return v;
    }
    // numerator or denominator overflow f64: shift both down first
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = ToPrimitive::to_f64(&(n >> shift)).unwrap_or(f64::NAN);
    let d = ToPrimitive::to_f64(&(d >> shift)).unwrap_or(f64::NAN);
    n / d
}

/// Exact rational for an `f64` (every finite double is a dyadic rational).
pub fn f64_to_rational(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {v}")))
}

/// `Some(n)` if `v` is an integer-valued finite double.
pub fn as_integer(v: f64) -> Option<i64> {
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_forms_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("-2.5E1").unwrap(), int(-25));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn binomial_boundary_convention() {
        assert_eq!(binom(-1, 0), BigInt::one());
        assert_eq!(binom(-3, 0), BigInt::one());
        assert_eq!(binom(0, 1), BigInt::zero());
        assert_eq!(binom(-1, 1), BigInt::zero());
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(7, 7), BigInt::one());
        assert_eq!(binom(3, 4), BigInt::zero());
        assert_eq!(binom(3, -1), BigInt::zero());
    }

    #[test]
    fn neumaier_sum_recovers_cancelled_digits() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(<f64 as Scalar>::sum(&terms), 2.0);
    }

    #[test]
    fn nonpositive_integer_detection() {
        assert_eq!((-3.0f64).as_nonpositive_integer(), Some(-3));
        assert_eq!(0.0f64.as_nonpositive_integer(), Some(0));
        assert_eq!((-0.5f64).as_nonpositive_integer(), None);
        assert_eq!(rat(-4, 2).as_nonpositive_integer(), Some(-2));
        assert_eq!(rat(1, 2).as_nonpositive_integer(), None);
    }
}
