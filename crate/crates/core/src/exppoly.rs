//! Polynomials in x = 2^k with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Σ_j c_j x^j with x = 2^k. Zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ExpPoly {
    coeffs: BTreeMap<u32, BigRational>,
}

pub fn rat(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// 2^e as an exact rational, e may be negative.
pub fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, power: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(power, c);
        p
    }

    /// Integer coefficients listed from the highest power down to x^0.
    pub fn from_descending<T: Into<BigInt> + Copy>(coeffs: &[T]) -> Self {
        let top = coeffs.len().saturating_sub(1) as u32;
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(top - i as u32, rat(c));
        }
        p
    }

    /// ∏ (x − r) over the given roots.
    pub fn from_roots(roots: &[BigRational]) -> Self {
        roots.iter().fold(Self::constant(BigRational::one()), |acc, r| {
            &acc * &Self::from_pairs(vec![(1, BigRational::one()), (0, -r.clone())])
        })
    }

    pub fn from_pairs(pairs: Vec<(u32, BigRational)>) -> Self {
        let mut p = Self::zero();
        for (j, c) in pairs {
            p.add_term(j, c);
        }
        p
    }

    pub fn add_term(&mut self, power: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(power).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&power);
        }
    }

    pub fn coeff(&self, power: u32) -> BigRational {
        self.coeffs.get(&power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Nonzero terms in ascending power order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().map(|(&j, c)| (j, c))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&j, c)| (j, c * s)).collect(),
        }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        // Horner over the dense range of powers
        let Some(deg) = self.degree() else {
            return BigRational::zero();
        };
        let mut acc = BigRational::zero();
        for j in (0..=deg).rev() {
            acc = acc * x + self.coeff(j);
        }
        acc
    }

    /// Value at x = 2^k.
    pub fn eval_pow2(&self, k: i64) -> BigRational {
        self.eval(&pow2(k))
    }

    /// Value at x = 2^k, required to be an integer.
    pub fn eval_integer(&self, k: u32) -> Result<BigInt> {
        let v = self.eval_pow2(i64::from(k));
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(Error::NonIntegral {
                context: format!("polynomial {self} at k = {k}"),
                value: v.to_string(),
            })
        }
    }

    /// Powers where `self` and `other` differ, with both coefficients.
    pub fn diff(&self, other: &Self) -> Vec<(u32, BigRational, BigRational)> {
        let powers: std::collections::BTreeSet<u32> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        powers
            .into_iter()
            .filter_map(|j| {
                let (a, b) = (self.coeff(j), other.coeff(j));
                (a != b).then_some((j, a, b))
            })
            .collect()
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;

    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (j, c) in rhs.terms() {
            out.add_term(j, c.clone());
        }
        out
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;

    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;

    fn neg(self) -> ExpPoly {
        ExpPoly {
            coeffs: self.coeffs.iter().map(|(&j, c)| (j, -c)).collect(),
        }
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;

    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (i, a) in self.terms() {
            for (j, b) in rhs.terms() {
                out.add_term(i + j, a * b);
            }
        }
        out
    }
}

impl std::iter::Sum for ExpPoly {
    fn sum<I: Iterator<Item = ExpPoly>>(iter: I) -> Self {
        iter.fold(ExpPoly::zero(), |acc, p| &acc + &p)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (&j, c)) in self.coeffs.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            match j {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}*x")?,
                _ => write!(f, "{mag}*x^{j}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_basics() {
        let p = ExpPoly::from_descending(&[4, -48, 128]);
        let q = &ExpPoly::from_roots(&[rat(4), rat(8)]) * &ExpPoly::constant(rat(4));
        assert_eq!(p, q);
        assert_eq!(p.eval_integer(4).unwrap(), BigInt::from(384));
        assert_eq!(p.eval_integer(2).unwrap(), BigInt::zero());
        assert_eq!(p.to_string(), "4*x^2 - 48*x + 128");
        assert!((&p - &q).is_zero());
        assert_eq!((&p - &q).degree(), None);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = ExpPoly::monomial(rat(3), 2);
        p.add_term(2, rat(-3));
        assert!(p.is_zero());
        assert_eq!(ExpPoly::monomial(rat(0), 5), ExpPoly::zero());
    }

    #[test]
    fn non_integral_values_rejected() {
        let p = ExpPoly::constant(ratio(1, 3));
        assert!(matches!(p.eval_integer(3), Err(Error::NonIntegral { .. })));
        assert_eq!(pow2(-2), ratio(1, 4));
    }

    #[test]
    fn diff_lists_mismatches() {
        let a = ExpPoly::from_descending(&[1, 2, 3]);
        let b = ExpPoly::from_descending(&[1, 5, 3]);
        assert_eq!(a.diff(&b), vec![(1, rat(2), rat(5))]);
        assert!(a.diff(&a).is_empty());
    }

    fn poly() -> impl Strategy<Value = ExpPoly> {
        proptest::collection::vec(-50i64..50, 0..5).prop_map(|c| ExpPoly::from_descending(&c))
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), k in 0i64..12) {
            prop_assert_eq!((&a * &b).eval_pow2(k), a.eval_pow2(k) * b.eval_pow2(k));
            prop_assert_eq!((&a + &b).eval_pow2(k), a.eval_pow2(k) + b.eval_pow2(k));
        }
    }
}
