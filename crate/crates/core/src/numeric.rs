//! Exact rational scalars and the circle group Q/Z.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational n/d (d nonzero).
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Exact integer power of a rational, with negative exponents allowed.
pub fn rat_pow(base: &Rat, exp: &BigInt) -> Rat {
    if exp.is_zero() {
        return Rat::one();
    }
    let mag: u64 = exp.magnitude().try_into().expect("exponent out of range");
    let mut acc = Rat::one();
    for _ in 0..mag {
        acc *= base;
    }
    if exp.is_negative() {
        acc.recip()
    } else {
        acc
    }
}

/// An element of Q/Z, kept reduced to the half-open interval [0, 1).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QZ(Rat);

impl QZ {
    pub fn zero() -> Self {
        QZ(Rat::zero())
    }

    /// Class of an arbitrary rational.
    pub fn from_rat(r: Rat) -> Self {
        let f = r.floor();
        QZ(r - f)
    }

    /// Class of a/n.
    pub fn new(a: i64, n: u64) -> Self {
        Self::from_rat(ratio(a, n as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Canonical representative in [0, 1).
    pub fn rep(&self) -> &Rat {
        &self.0
    }

    pub fn add(&self, other: &QZ) -> QZ {
        QZ::from_rat(&self.0 + &other.0)
    }

    pub fn neg(&self) -> QZ {
        QZ::from_rat(-&self.0)
    }

    pub fn sub(&self, other: &QZ) -> QZ {
        QZ::from_rat(&self.0 - &other.0)
    }

    /// Additive order in Q/Z (the denominator of the representative).
    pub fn order(&self) -> u64 {
        self.0
            .denom()
            .try_into()
            .expect("Q/Z order out of u64 range")
    }
}

impl fmt::Debug for QZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for QZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qz_normalizes() {
        assert_eq!(QZ::new(-1, 2), QZ::new(1, 2));
        assert_eq!(QZ::new(3, 2), QZ::new(1, 2));
        assert!(QZ::new(4, 2).is_zero());
    }

    #[test]
    fn qz_group_ops() {
        let a = QZ::new(1, 3);
        let b = QZ::new(2, 3);
        assert!(a.add(&b).is_zero());
        assert_eq!(a.neg(), b);
        assert_eq!(a.order(), 3);
        assert_eq!(QZ::zero().order(), 1);
    }

    #[test]
    fn rat_pow_negative() {
        assert_eq!(rat_pow(&rat(5), &BigInt::from(-2)), ratio(1, 25));
        assert_eq!(rat_pow(&rat(3), &BigInt::from(0)), rat(1));
    }
}
