//! Scalar abstractions shared by the gain, bound and LP code.
//!
//! Gains enter the deterministic model only through their binary
//! expansion, so any type that can report its fractional bits exactly
//! is usable as a gain. Floats are exact dyadic rationals; ratios of
//! integers are handled with big-integer long division.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A real number in (1, 2] whose binary expansion can be read exactly.
pub trait Gain: Clone + Debug + Send + Sync {
    /// The `count` bits following the binary point, `[g]_1 .. [g]_count`.
    ///
    /// Terminating expansions are used for dyadic values, except that
    /// `2` is read as `1.111...`.
    fn fraction_bits(&self, count: usize) -> Result<Vec<bool>>;

    fn to_f64(&self) -> f64;
}

fn float_fraction_bits(g: f64, count: usize) -> Result<Vec<bool>> {
    if !(g > 1.0 && g <= 2.0) {
        return Err(Error::GainDomain(g));
    }
    if g == 2.0 {
        return Ok(vec![true; count]);
    }
    // g - 1 is exact for g in [1, 2]; its mantissa gives the bits.
    let (mantissa, exponent, _) = Float::integer_decode(g - 1.0);
    let shift = -(exponent as i64);
    Ok((1..=count as i64)
        .map(|k| {
            let pos = shift - k;
            (0..64).contains(&pos) && (mantissa >> pos) & 1 == 1
        })
        .collect())
}

impl Gain for f64 {
    fn fraction_bits(&self, count: usize) -> Result<Vec<bool>> {
        float_fraction_bits(*self, count)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Gain for f32 {
    fn fraction_bits(&self, count: usize) -> Result<Vec<bool>> {
        float_fraction_bits(f64::from(*self), count)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

fn ratio_fraction_bits(num: BigInt, den: BigInt, count: usize) -> Result<Vec<bool>> {
    let as_f64 = || num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN);
    if den.is_zero() || num.is_negative() != den.is_negative() {
        return Err(Error::GainDomain(as_f64()));
    }
    let (num, den) = (num.abs(), den.abs());
    if num <= den || num > &den * 2 {
        return Err(Error::GainDomain(as_f64()));
    }
    if num == &den * 2 {
        return Ok(vec![true; count]);
    }
    let mut rem = num - &den;
    let mut bits = Vec::with_capacity(count);
    for _ in 0..count {
        rem <<= 1;
        let bit = rem >= den;
        if bit {
            rem -= &den;
        }
        bits.push(bit);
    }
    Ok(bits)
}

macro_rules! ratio_gain {
    ($($t:ty),*) => {$(
        impl Gain for Ratio<$t> {
            fn fraction_bits(&self, count: usize) -> Result<Vec<bool>> {
                ratio_fraction_bits(BigInt::from(*self.numer()), BigInt::from(*self.denom()), count)
            }

            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }
        }
    )*};
}

ratio_gain!(i32, i64, i128);

impl Gain for BigRational {
    fn fraction_bits(&self, count: usize) -> Result<Vec<bool>> {
        ratio_fraction_bits(self.numer().clone(), self.denom().clone(), count)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Ordered field used by the vertex-enumeration LP.
///
/// Exact types (rationals) use zero tolerance; floats compare with a
/// small slack.
pub trait LpScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(v: i64) -> Self;

    fn tolerance() -> Self;

    fn to_f64(&self) -> f64;

    /// `num / den`, rounded when the type is inexact.
    fn from_ratio(num: i128, den: i128) -> Self;

    /// The exact integer value, if there is one.
    fn to_integer(&self) -> Option<i64> {
        None
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negligible(&self) -> bool {
        self.abs_val() <= Self::tolerance()
    }
}

impl LpScalar for Ratio<i64> {
    fn from_ratio(num: i128, den: i128) -> Self {
        let g = num_integer::gcd(num, den);
        let (num, den) = (num / g, den / g);
        Ratio::new(num as i64, den as i64)
    }

    fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| *self.numer())
    }

    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }

    fn tolerance() -> Self {
        Ratio::zero()
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl LpScalar for Ratio<i128> {
    fn from_ratio(num: i128, den: i128) -> Self {
        let g = num_integer::gcd(num, den);
        let (num, den) = (num / g, den / g);
        Ratio::new(num, den)
    }

    fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| i64::try_from(*self.numer()).ok()).flatten()
    }

    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(i128::from(v))
    }

    fn tolerance() -> Self {
        Ratio::zero()
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl LpScalar for f64 {
    fn from_ratio(num: i128, den: i128) -> Self {
        num as f64 / den as f64
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn tolerance() -> Self {
        1e-9
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for f32 {
    fn from_ratio(num: i128, den: i128) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn tolerance() -> Self {
        1e-4
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}
