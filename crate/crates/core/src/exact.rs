//! Exact integer and rational arithmetic.
//!
//! Every probability in this crate is an exact rational, and the threshold
//! `ξ` is only ever handled through its square `q = ξ²`. Comparisons against
//! `ξ√n` are therefore turned into integer comparisons after squaring.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self> {
        let den = denominator.into();
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numerator.into(), den)))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(value.into()))
    }

    /// `numerator / 2^exponent`, the natural form of every sign-sum probability.
    pub fn dyadic(numerator: BigUint, exponent: u64) -> Self {
        let den = BigUint::one() << exponent;
        Self(BigRational::new(
            BigInt::from_biguint(Sign::Plus, numerator),
            BigInt::from_biguint(Sign::Plus, den),
        ))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Self(self.0.recip()))
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    /// Nearest `f64`; only for display and cross-checks.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `sig` significant digits, rounding half to even.
    pub fn to_decimal(&self, sig: usize) -> String {
        let sig = sig.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let num = self.numer().abs();
        let den = self.denom().clone();

        // Find e with 10^e <= |r| < 10^(e+1).
        let approx = (num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2;
        let mut e = approx.floor() as i64;
        let ge_pow10 = |e: i64| -> bool {
            if e >= 0 {
                num >= &den * pow10(e as u32)
            } else {
                &num * pow10((-e) as u32) >= den
            }
        };
        while !ge_pow10(e) {
            e -= 1;
        }
        while ge_pow10(e + 1) {
            e += 1;
        }

        // digits = round_half_even(|r| * 10^(sig - 1 - e))
        let shift = sig as i64 - 1 - e;
        let (sn, sd) = if shift >= 0 {
            (&num * pow10(shift as u32), den.clone())
        } else {
            (num.clone(), &den * pow10((-shift) as u32))
        };
        let (mut digits, rem) = sn.div_rem(&sd);
        let twice = &rem * 2u32;
        if twice > sd || (twice == sd && digits.is_odd()) {
            digits += 1u32;
        }
        if digits == pow10(sig as u32) {
            digits = pow10(sig as u32 - 1);
            e += 1;
        }
        let digits = digits.to_string();
        debug_assert_eq!(digits.len(), sig);

        let body = if e >= 0 {
            let int_len = e as usize + 1;
            if int_len >= sig {
                format!("{}{}", digits, "0".repeat(int_len - sig))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accepts `p/q`, a plain integer, or a finite decimal such as `1.21`.
impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Self::new(n, d).map_err(|_| bad());
        }
        let (negative, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut numer: BigInt = joined.parse().map_err(|_| bad())?;
        if negative {
            numer = -numer;
        }
        Self::new(numer, pow10(frac_part.len() as u32))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for ExactRational {
    type Output = ExactRational;
    /// Panics on division by zero, like the underlying big rational.
    fn div(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a ExactRational> for &'a ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: &'a ExactRational) -> ExactRational {
        ExactRational(&self.0 / &rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl From<i64> for ExactRational {
    fn from(v: i64) -> Self {
        Self::from_integer(v)
    }
}

impl From<BigRational> for ExactRational {
    fn from(v: BigRational) -> Self {
        Self(v)
    }
}

/// Integer square root: the unique `u` with `u² ≤ m < (u+1)²`.
pub fn isqrt(m: &BigInt) -> Result<BigUint> {
    match m.to_biguint() {
        Some(m) => Ok(m.sqrt()),
        None => Err(Error::Domain(format!("isqrt of negative value {m}"))),
    }
}

/// `⌊(n + √(q·n)) / 2⌋`, computed exactly for rational `q = p/s`.
///
/// With `u = isqrt(p·n·s)` the result is `⌊(n·s + u) / (2s)⌋`: when `p·n·s`
/// is not a square, no multiple of `2s` lies between `n·s + u` and
/// `n·s + √(p·n·s)`.
pub fn floor_half_n_plus_xi_sqrt_n(n: u64, q: &ExactRational) -> Result<BigInt> {
    if !q.is_positive() {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    let p = q.numer();
    let s = q.denom();
    let n = BigInt::from(n);
    let u = BigInt::from(isqrt(&(p * &n * s))?);
    Ok((&n * s + u).div_floor(&(s * 2)))
}

/// Smallest integer `≥ r`.
pub fn ceil_rational(r: &ExactRational) -> BigInt {
    r.as_big_rational().ceil().to_integer()
}

/// Binomial coefficient `C(n, j)`; zero outside `0 ≤ j ≤ n`.
pub fn binomial(n: u64, j: i64) -> BigUint {
    if j < 0 || j as u64 > n {
        return BigUint::zero();
    }
    let j = (j as u64).min(n - j as u64);
    let mut c = BigUint::one();
    for i in 0..j {
        c *= n - i;
        c /= i + 1;
    }
    c
}
