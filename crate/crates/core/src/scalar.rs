//! Field scalars. Exact arithmetic uses [`Rational`]; floating types are
//! supported for exploratory use where equality means "within tolerance".

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A field of characteristic zero usable as matrix entries.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync {
    fn from_rational(q: &Rational) -> Self;

    /// Exact zero for exact types, tolerance-based for floats.
    fn is_negligible(&self) -> bool;

    /// Whether `self` is a strictly better elimination pivot than `other`.
    /// Exact types accept the first nonzero entry.
    fn better_pivot(&self, _other: &Self) -> bool {
        false
    }

    fn near(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn to_text(&self) -> String;
    fn from_text(s: &str) -> Result<Self>;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(n), BigInt::from(d)))
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn near(&self, other: &Self) -> bool {
        self == other
    }
    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn from_text(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let int = |t: &str| -> Result<BigInt> {
        let t = t.trim();
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse::<BigInt>().map_err(|_| bad())
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = int(q)?;
            if !q.is_positive() {
                return Err(bad());
            }
            Ok(Rational::new(int(p)?, q))
        }
        None => Ok(Rational::from_integer(int(s)?)),
    }
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            fn from_rational(q: &Rational) -> Self {
                q.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn is_negligible(&self) -> bool {
                self.abs() <= $eps
            }
            fn better_pivot(&self, other: &Self) -> bool {
                self.abs() > other.abs()
            }
            fn to_text(&self) -> String {
                format!("{:?}", self)
            }
            fn from_text(s: &str) -> Result<Self> {
                if s.contains('/') {
                    return parse_rational(s).map(|q| Self::from_rational(&q));
                }
                s.trim()
                    .parse::<$t>()
                    .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-4);

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
