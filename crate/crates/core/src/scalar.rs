//! Coefficient rings used by series and algebra elements.
//!
//! Everything in the crate is generic over [`Coefficient`]. Exact work uses
//! [`num_rational::BigRational`]; the other implementations exist for quick
//! experiments where the values are known to stay small.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// A commutative ring with enough structure for truncated series arithmetic.
pub trait Coefficient:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Multiplicative inverse, if this value is a unit of the ring.
    fn try_inverse(&self) -> Option<Self>;

    fn from_bigint(n: &BigInt) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    /// `num / den`, if representable.
    fn from_fraction(num: i64, den: i64) -> Option<Self> {
        Self::from_i64(den)
            .try_inverse()
            .map(|inv| Self::from_i64(num) * inv)
    }

    /// The value as an exact integer, when it is one.
    fn to_integer(&self) -> Option<BigInt>;
}

impl Coefficient for BigRational {
    fn try_inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }

    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| Ratio::to_integer(self))
    }
}

impl Coefficient for Ratio<i64> {
    fn try_inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }

    fn from_bigint(n: &BigInt) -> Self {
        Ratio::from_integer(n.to_i64().expect("coefficient exceeds i64 range"))
    }

    fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| BigInt::from(*self.numer()))
    }
}

impl Coefficient for BigInt {
    fn try_inverse(&self) -> Option<Self> {
        (self.abs().is_one()).then(|| self.clone())
    }

    fn from_bigint(n: &BigInt) -> Self {
        n.clone()
    }

    fn to_integer(&self) -> Option<BigInt> {
        Some(self.clone())
    }
}

macro_rules! float_coefficient {
    ($t:ty) => {
        impl Coefficient for $t {
            fn try_inverse(&self) -> Option<Self> {
                (*self != 0.0).then(|| 1.0 / *self)
            }

            fn from_bigint(n: &BigInt) -> Self {
                n.to_f64().map(|v| v as $t).unwrap_or(<$t>::NAN)
            }

            fn to_integer(&self) -> Option<BigInt> {
                (self.fract() == 0.0)
                    .then(|| BigInt::from_f64(*self as f64))
                    .flatten()
            }
        }
    };
}

float_coefficient!(f64);
float_coefficient!(f32);

/// Formats a rational as `numerator/denominator`, always with an explicit
/// denominator.
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `a`, `-a` or `a/b` into an exact rational.
pub fn parse_fraction(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Parses `a` or `a/b` into a small exact rational.
pub fn parse_small_fraction(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Ratio::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Ratio::from_integer),
    }
}

/// Formats a small rational as `a` or `a/b`.
pub fn small_fraction_string(r: &Ratio<i64>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
