//! Exact arithmetic in the quadratic field Q(√2).
//!
//! Wall positions and dihedral-angle cosines in this crate live in Q(√2),
//! so equality and sign tests can be decided exactly. Floating point enters
//! only through [`Q2::to_f64`] at presentation time.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::rational::BigRational;
use num::{BigInt, Signed, ToPrimitive, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, the coefficient field for [`Q2`].
pub type Rat = BigRational;

/// Rational `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Rational from a machine integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from(BigInt::from(n))
}

/// An element `a + b√2` of Q(√2), with exact rational coefficients.
///
/// The representation is unique because √2 is irrational, so derived
/// equality is exact equality in the field.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Q2 {
    pub a: Rat,
    pub b: Rat,
}

impl Q2 {
    pub fn new(a: Rat, b: Rat) -> Self {
        Q2 { a, b }
    }

    pub fn from_int(n: i64) -> Self {
        Q2 { a: rat_int(n), b: Rat::zero() }
    }

    pub fn from_rat(a: Rat) -> Self {
        Q2 { a, b: Rat::zero() }
    }

    /// `p/q`, no √2 part.
    pub fn rational(p: i64, q: i64) -> Self {
        Q2 { a: rat(p, q), b: Rat::zero() }
    }

    /// `(p/q)·√2`.
    pub fn sqrt2_times(p: i64, q: i64) -> Self {
        Q2 { a: Rat::zero(), b: rat(p, q) }
    }

    pub fn sqrt2() -> Self {
        Q2::sqrt2_times(1, 1)
    }

    pub fn zero() -> Self {
        Q2::default()
    }

    pub fn one() -> Self {
        Q2::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Field conjugate `a − b√2`.
    pub fn conjugate(&self) -> Self {
        Q2 { a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field norm `a² − 2b²`, a rational. Zero iff the element is zero.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - rat_int(2) * &self.b * &self.b
    }

    /// Exact sign: -1, 0, or 1.
    ///
    /// When the two terms have opposite signs the comparison of `a` against
    /// `-b√2` reduces to comparing `a²` with `2b²`, which stays rational.
    pub fn sign(&self) -> i32 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        // a and b√2 pull in opposite directions; the larger square wins.
        sa * rat_sign(&self.norm())
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inverse(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero in Q(sqrt2)");
        Q2 { a: &self.a / &n, b: -(&self.b / &n) }
    }

    /// Exact square, staying in the field.
    pub fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    pub fn to_f64(&self) -> f64 {
        rat_f64(&self.a) + rat_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

pub(crate) fn rat_sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub(crate) fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

impl Ord for Q2 {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).sign() {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl PartialOrd for Q2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Q2 {
    type Output = Q2;
    fn add(self, rhs: Q2) -> Q2 {
        Q2 { a: self.a + rhs.a, b: self.b + rhs.b }
    }
}

impl Sub for Q2 {
    type Output = Q2;
    fn sub(self, rhs: Q2) -> Q2 {
        Q2 { a: self.a - rhs.a, b: self.b - rhs.b }
    }
}

impl Mul for Q2 {
    type Output = Q2;
    fn mul(self, rhs: Q2) -> Q2 {
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let a = &self.a * &rhs.a + rat_int(2) * &self.b * &rhs.b;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Q2 { a, b }
    }
}

impl Div for Q2 {
    type Output = Q2;
    fn div(self, rhs: Q2) -> Q2 {
        self * rhs.inverse()
    }
}

impl Neg for Q2 {
    type Output = Q2;
    fn neg(self) -> Q2 {
        Q2 { a: -self.a, b: -self.b }
    }
}

impl AddAssign for Q2 {
    fn add_assign(&mut self, rhs: Q2) {
        *self = self.clone() + rhs;
    }
}

impl SubAssign for Q2 {
    fn sub_assign(&mut self, rhs: Q2) {
        *self = self.clone() - rhs;
    }
}

impl MulAssign for Q2 {
    fn mul_assign(&mut self, rhs: Q2) {
        *self = self.clone() * rhs;
    }
}

impl fmt::Display for Q2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt2", self.b);
        }
        if self.b.is_positive() {
            write!(f, "{}+{}*sqrt2", self.a, self.b)
        } else {
            write!(f, "{}{}*sqrt2", self.a, self.b)
        }
    }
}

impl fmt::Debug for Q2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q2({})", self)
    }
}

#[derive(Serialize, Deserialize)]
struct Q2Wire {
    a: String,
    b: String,
}

impl Serialize for Q2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Q2Wire { a: self.a.to_string(), b: self.b.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Q2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Q2Wire::deserialize(d)?;
        let a = BigRational::from_str(&w.a)
            .map_err(|e| D::Error::custom(format!("bad rational {:?}: {}", w.a, e)))?;
        let b = BigRational::from_str(&w.b)
            .map_err(|e| D::Error::custom(format!("bad rational {:?}: {}", w.b, e)))?;
        Ok(Q2 { a, b })
    }
}
