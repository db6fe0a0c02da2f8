//! Formal sums Σ c·q^e with rational exponents and rational coefficients.
//!
//! These are the value spaces of stringy counts and orbifold volumes. A QExp
//! is formal in the symbol q; to compare two of them as elements of the real
//! field Q(q^{1/N}) for a concrete prime power q = p^m, reduce both with
//! [`QExp::reduce_at`], which rewrites every term over the prime p and folds
//! integer powers of p into the coefficients. That reduction is faithful
//! because p^{1/N} has degree N over Q, which is what makes equality checks
//! exact rather than numeric.

use crate::numeric::{rat_pow, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A finite formal sum of terms coefficient · q^exponent.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct QExp {
    terms: BTreeMap<Rat, Rat>,
}

impl QExp {
    pub fn zero() -> Self {
        QExp::default()
    }

    pub fn one() -> Self {
        Self::term(Rat::zero(), Rat::one())
    }

    /// The single term c · q^e.
    pub fn term(exponent: Rat, coeff: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exponent, coeff);
        }
        QExp { terms }
    }

    /// q^e.
    pub fn power(exponent: Rat) -> Self {
        Self::term(exponent, Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::term(Rat::zero(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &QExp) -> QExp {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        QExp { terms }
    }

    pub fn sub(&self, other: &QExp) -> QExp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QExp {
        QExp {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &QExp) -> QExp {
        let mut out = QExp::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out = out.add(&QExp::term(e1 + e2, c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> QExp {
        if c.is_zero() {
            return QExp::zero();
        }
        QExp {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    /// The value in Q(p^{1/N}) at q = p^m: exponents are rewritten over p and
    /// their integer parts folded into the coefficients, leaving one rational
    /// coefficient per fractional p-exponent class in [0, 1).
    pub fn reduce_at(&self, p: u64, m: u32) -> PadicValue {
        let mut parts: BTreeMap<Rat, Rat> = BTreeMap::new();
        let p_rat = Rat::from_integer(BigInt::from(p));
        for (e, c) in &self.terms {
            let ep = e * Rat::from_integer(BigInt::from(m));
            let fl = ep.floor();
            let frac = &ep - &fl;
            let folded = c * rat_pow(&p_rat, fl.numer());
            let entry = parts.entry(frac).or_insert_with(Rat::zero);
            *entry += folded;
        }
        parts.retain(|_, c| !c.is_zero());
        PadicValue { p, parts }
    }

    /// Substitute an exact rational for q; only valid when all exponents are
    /// integers.
    pub fn eval_rational(&self, q: &Rat) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            if !e.is_integer() {
                return None;
            }
            acc += c * rat_pow(q, e.numer());
        }
        Some(acc)
    }

    /// Equality as elements of Q(q^{1/N}) at the concrete prime power p^m.
    pub fn value_eq(&self, other: &QExp, p: u64, m: u32) -> bool {
        self.reduce_at(p, m) == other.reduce_at(p, m)
    }
}

impl fmt::Display for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "q^{e}")?;
            } else {
                write!(f, "{c}*q^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An exact value in Q(p^{1/N}): rational coefficients indexed by fractional
/// p-exponents in [0, 1).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PadicValue {
    p: u64,
    parts: BTreeMap<Rat, Rat>,
}

impl PadicValue {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Coefficients by fractional p-exponent.
    pub fn parts(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.parts.iter()
    }

    /// Some(r) when the value is rational.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.parts.is_empty() {
            return Some(Rat::zero());
        }
        if self.parts.len() == 1 {
            let (e, c) = self.parts.iter().next().unwrap();
            if e.is_zero() {
                return Some(c.clone());
            }
        }
        None
    }
}

impl fmt::Display for PadicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.parts {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{}^{e}", self.p)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, ratio};

    #[test]
    fn ring_ops() {
        let a = QExp::power(rat(2)).add(&QExp::power(rat(1))); // q^2 + q
        let b = QExp::power(ratio(1, 2));
        let prod = a.mul(&b);
        let expected = QExp::power(ratio(5, 2)).add(&QExp::power(ratio(3, 2)));
        assert_eq!(prod, expected);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn fractional_exponents_multiply() {
        let h = QExp::power(ratio(1, 2));
        assert_eq!(h.mul(&h), QExp::power(rat(1)));
    }

    #[test]
    fn reduce_at_prime() {
        // q^2 + q at q = 5 is the rational 30
        let a = QExp::power(rat(2)).add(&QExp::power(rat(1)));
        let v = a.reduce_at(5, 1);
        assert_eq!(v.as_rational(), Some(rat(30)));
        // q^{-1/2} at q = 5 is (1/5)·5^{1/2}, irrational
        let b = QExp::power(ratio(-1, 2));
        let v = b.reduce_at(5, 1);
        assert_eq!(v.as_rational(), None);
        assert_eq!(
            v.parts()
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect::<Vec<_>>(),
            vec![(ratio(1, 2), ratio(1, 5))]
        );
    }

    #[test]
    fn reduce_at_prime_power_folds_square_roots() {
        // q^{1/2} at q = 9 = 3^2 is exactly 3
        let a = QExp::power(ratio(1, 2));
        let v = a.reduce_at(3, 2);
        assert_eq!(v.as_rational(), Some(rat(3)));
        // and q + q^{1/2} at q = 9 is 12
        let b = QExp::power(rat(1)).add(&a);
        assert_eq!(b.reduce_at(3, 2).as_rational(), Some(rat(12)));
    }

    #[test]
    fn value_equality_vs_formal_equality() {
        // formally distinct, equal as values at q = 4 = 2^2
        let a = QExp::power(ratio(1, 2));
        let b = QExp::constant(rat(2));
        assert_ne!(a, b);
        assert!(a.value_eq(&b, 2, 2));
        assert!(!a.value_eq(&b, 5, 1));
    }
}
