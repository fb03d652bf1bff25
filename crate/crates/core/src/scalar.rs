//! Scalar abstractions.
//!
//! Exact arithmetic (polynomial coefficients, canonical forms, parameter
//! resolution) is written against [`Coefficient`], a field with exact
//! division. Floating-point evaluation is written against [`Real`], which
//! is implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact field element used as a polynomial coefficient.
pub trait Coefficient:
    Clone
    + Debug
    + Display
    + Eq
    + Ord
    + Hash
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Lossless conversion from the expression-level constant type.
    fn from_rational(value: &BigRational) -> Option<Self>;

    fn to_rational(&self) -> BigRational;

    fn to_f64(&self) -> f64;

    /// Exact square root when `self` is the square of a field element.
    fn sqrt_exact(&self) -> Option<Self>;

    fn negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Coefficient for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(value.clone())
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if Signed::is_negative(self) {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }
}

impl Coefficient for Ratio<i64> {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }

    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(Ratio::new(value.numer().to_i64()?, value.denom().to_i64()?))
    }

    fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if *self.numer() < 0 {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (n * n == *self.numer() && d * d == *self.denom()).then(|| Ratio::new(n, d))
    }
}

/// Floating-point type used for numeric evaluation.
pub trait Real: num_traits::Float + FromPrimitive + Debug + Display + Send + Sync {
    fn from_rational(value: &BigRational) -> Self {
        Self::from_f64(ToPrimitive::to_f64(value).unwrap_or(f64::NAN)).unwrap_or_else(Self::nan)
    }
}

impl Real for f32 {}
impl Real for f64 {}
