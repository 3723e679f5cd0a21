//! Gaussian rationals and exact angular comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(
            Rational::from_integer(re.into()),
            Rational::from_integer(im.into()),
        )
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Im(conj(self) * other): positive when `other` is counterclockwise of `self`.
    pub fn cross(&self, other: &Self) -> Rational {
        &self.re * &other.im - &self.im * &other.re
    }

    /// Re(conj(self) * other).
    pub fn dot(&self, other: &Self) -> Rational {
        &self.re * &other.re + &self.im * &other.im
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        Ok(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    /// Argument lies in [0, pi): the open upper half plane plus the positive real axis.
    pub fn in_upper_half(&self) -> bool {
        self.im.is_positive() || (self.im.is_zero() && self.re.is_positive())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `other` is a positive real multiple of `self`.
    pub fn same_ray(&self, other: &Self) -> bool {
        !self.is_zero()
            && !other.is_zero()
            && self.cross(other).is_zero()
            && self.dot(other).is_positive()
    }

    /// Primitive Gaussian integer on the same ray.
    pub fn canonical_direction(&self) -> Result<(BigInt, BigInt)> {
        if self.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        let l = self.re.denom().lcm(self.im.denom());
        let x = (&self.re * Rational::from_integer(l.clone())).to_integer();
        let y = (&self.im * Rational::from_integer(l)).to_integer();
        let g = x.gcd(&y);
        Ok((x / &g, y / &g))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn to_text(&self) -> String {
        format!("{},{}", self.re.to_text(), self.im.to_text())
    }

    /// Parses `re,im` with rational components.
    pub fn from_text(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected re,im: {s:?}")))?;
        Ok(Self::new(parse_rational(a)?, parse_rational(b)?))
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}i", self.re, sign, self.im.abs())
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussRat {
            type Output = GaussRat;
            fn $m(self, o: GaussRat) -> GaussRat {
                (&self).$m(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -&self
    }
}

/// Compares arguments in [0, 2pi), the cut lying along the positive real axis.
pub fn direction_cmp(u: &GaussRat, v: &GaussRat) -> Result<Ordering> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let half = |z: &GaussRat| if z.in_upper_half() { 0 } else { 1 };
    Ok(half(u).cmp(&half(v)).then_with(|| {
        let c = u.cross(v);
        if c.is_positive() {
            Ordering::Less
        } else if c.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }))
}

pub fn is_parallel_same_dir(u: &GaussRat, v: &GaussRat) -> Result<bool> {
    Ok(direction_cmp(u, v)? == Ordering::Equal)
}

/// True when the ray of `b` lies strictly between those of `a` and `c`
/// going counterclockwise from `a`.
pub fn strictly_between_ccw(a: &GaussRat, b: &GaussRat, c: &GaussRat) -> Result<bool> {
    let ab = direction_cmp(a, b)?;
    let bc = direction_cmp(b, c)?;
    let ac = direction_cmp(a, c)?;
    use Ordering::*;
    Ok(match ac {
        Less => ab == Less && bc == Less,
        Greater | Equal => (ab == Less || bc == Less) && ab != Equal && bc != Equal,
    })
}

pub fn gauss(re: i64, im: i64) -> GaussRat {
    GaussRat::from_ints(re, im)
}

impl Default for GaussRat {
    fn default() -> Self {
        Self::zero()
    }
}
