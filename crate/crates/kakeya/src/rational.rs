//! Exact arbitrary-precision rational numbers.
//!
//! Every quantity in this crate (series terms, interval endpoints, grid
//! points, measure bounds) is a [`Rat`]. There is no floating point
//! anywhere; comparisons and arithmetic are exact.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseRatError;

/// An exact rational number, always stored in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    /// `num / den`. Panics if `den` is zero.
    pub fn new(num: BigInt, den: BigInt) -> Self {
        Rat(BigRational::new(num, den))
    }

    /// Shorthand for small ratios in tests and constants.
    pub fn ratio(num: i64, den: i64) -> Self {
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `2^-e`.
    pub fn pow2_neg(e: u32) -> Self {
        Rat(BigRational::new(
            BigInt::one(),
            BigInt::one() << (e as usize),
        ))
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

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rat(self.0.recip())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Integer nearest to `self` (half rounds down; exact ties do not
    /// matter for the grid searches this backs).
    pub fn round_int(&self) -> BigInt {
        (&self.0 + BigRational::new(BigInt::one(), BigInt::from(2)))
            .floor()
            .to_integer()
    }

    /// Canonical `"p/q"` form, denominator always present and positive.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Decimal expansion truncated toward zero to `digits` fractional
    /// digits. Exact long division, no rounding.
    pub fn decimal(&self, digits: usize) -> String {
        let sign = if self.is_negative() { "-" } else { "" };
        let num = self.0.numer().magnitude().clone();
        let den = self.0.denom().magnitude().clone();
        let int_part = &num / &den;
        if digits == 0 {
            return format!("{sign}{int_part}");
        }
        let rem = &num % &den;
        let scaled = rem * BigUint::from(10u32).pow(digits as u32);
        let frac = (scaled / &den).to_string();
        let frac = format!("{}{}", "0".repeat(digits - frac.len()), frac);
        format!("{sign}{int_part}.{frac}")
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fraction_string())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fraction_string())
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `"p/q"`, a plain integer, or a finite decimal string such
    /// as `"0.25"` (converted exactly).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| ParseRatError::new(s, "invalid numerator"))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| ParseRatError::new(s, "invalid denominator"))?;
            if den.is_zero() {
                return Err(ParseRatError::new(s, "zero denominator"));
            }
            return Ok(Rat(BigRational::new(num, den)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRatError::new(s, "invalid decimal fraction"));
            }
            let negative = int.starts_with('-');
            let int: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse()
                    .map_err(|_| ParseRatError::new(s, "invalid integer part"))?
            };
            let frac_num: BigInt = frac
                .parse()
                .map_err(|_| ParseRatError::new(s, "invalid decimal fraction"))?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let magnitude =
                BigRational::new(int.abs() * &scale + frac_num, scale);
            return Ok(Rat(if negative { -magnitude } else { magnitude }));
        }
        let n: BigInt = s
            .parse()
            .map_err(|_| ParseRatError::new(s, "invalid integer"))?;
        Ok(Rat(BigRational::from_integer(n)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut result = BigInt::one();
    for i in 0..k {
        result = result * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    result
}

/// Exact factorial n!.
pub fn factorial(n: u64) -> BigInt {
    let mut result = BigInt::one();
    for i in 2..=n {
        result *= BigInt::from(i);
    }
    result
}

/// 2-adic valuation of a positive integer.
pub fn two_adic_valuation(n: u64) -> u32 {
    assert!(n > 0, "valuation of zero is undefined");
    n.trailing_zeros()
}

impl Rat {
    /// Approximate magnitude as f64; used only for progress heuristics
    /// and display, never for any certified quantity.
    pub fn to_f64_lossy(&self) -> f64 {
        self.0
            .numer()
            .to_f64()
            .unwrap_or(f64::MAX)
            .div(self.0.denom().to_f64().unwrap_or(f64::MAX))
    }

    pub fn gcd_normalized(&self) -> bool {
        self.0.numer().gcd(self.0.denom()).is_one() || self.0.numer().is_zero()
    }
}
