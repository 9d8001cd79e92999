//! The character-sum side: the additive character on Laurent series, the
//! exponential sum over (Y, U₁..U_n), and brute-force counting of the
//! bilinear system Σ_i Y_i U_j^{(i)} = 0.
//!
//! A sequence α₁..α_{k+1} stands for t = Σ α_i T^{−i}. The T^{−1} coefficient
//! of t·P for a polynomial P = Σ c_m T^m is Σ_m α_{m+1} c_m, i.e. the parity
//! of `seq & P` in the packed layout, so no series object is ever built.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumeration::RankDistribution;
use crate::error::{Error, Result};
use crate::exppoly::pow2;
use crate::gf2matrix::{low_mask, rank_in_place};
use crate::persym::SequenceTuple;

/// Polynomial over GF(2) in T; bit m is the coefficient of T^m.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly2(pub u64);

impl Poly2 {
    pub const ZERO: Poly2 = Poly2(0);
    pub const ONE: Poly2 = Poly2(1);

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(self) -> Option<u32> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros())
    }

    fn fits(self, max_degree: i64) -> bool {
        self.degree().is_none_or(|d| i64::from(d) <= max_degree)
    }

    /// Carry-less product; `None` if the degree would exceed 63.
    pub fn checked_mul(self, other: Poly2) -> Option<Poly2> {
        match (self.degree(), other.degree()) {
            (Some(a), Some(b)) if a + b > 63 => None,
            _ => Some(Poly2(clmul(self.0, other.0))),
        }
    }
}

#[inline]
fn clmul(a: u64, mut b: u64) -> u64 {
    let mut out = 0;
    while b != 0 {
        out ^= a << b.trailing_zeros();
        b &= b - 1;
    }
    out
}

/// E(t·Y·U) for t read from `seq` (k+1 coefficients): +1 or −1.
pub fn char_e(seq: u64, k: usize, y: Poly2, u: Poly2) -> Result<i8> {
    if seq & !low_mask(k + 1) != 0 {
        return Err(Error::DegreeViolation(format!(
            "sequence has more than {} coefficients",
            k + 1
        )));
    }
    if !y.fits(k as i64 - 1) {
        return Err(Error::DegreeViolation(format!("deg Y > {}", k as i64 - 1)));
    }
    if !u.fits(1) {
        return Err(Error::DegreeViolation("deg U > 1".into()));
    }
    Ok(char_e_unchecked(seq, clmul(y.0, u.0)))
}

#[inline(always)]
fn char_e_unchecked(seq: u64, product: u64) -> i8 {
    if (seq & product).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

pub const EXPSUM_MAX_N: usize = 6;
pub const EXPSUM_MAX_K: usize = 10;

/// f_k(t) = Σ_{deg Y ≤ k−1} ∏_j Σ_{deg U_j ≤ 1} E(t_j Y U_j), by direct summation.
pub fn exponential_sum_direct(t: &SequenceTuple) -> Result<BigInt> {
    let (n, k) = (t.n(), t.k());
    if n > EXPSUM_MAX_N || k > EXPSUM_MAX_K {
        return Err(Error::BudgetExceeded {
            needed: (k + 2 * n) as u32,
            cap: (EXPSUM_MAX_K + 2 * EXPSUM_MAX_N) as u32,
        });
    }
    let mut total: i64 = 0;
    for y in 0u64..(1 << k) {
        let mut prod: i64 = 1;
        for &seq in t.seqs() {
            let inner: i64 = (0u64..4)
                .map(|u| i64::from(char_e_unchecked(seq, clmul(y, u))))
                .sum();
            prod *= inner;
            if prod == 0 {
                break;
            }
        }
        total += prod;
    }
    Ok(BigInt::from(total))
}

/// Cap on q·k + 2qn, the bit count of a full (Y, U) assignment.
pub const SOLUTION_BUDGET_BITS: u32 = 34;

/// R_{q,n}^{(k)}: tuples (Y_i, U_j^{(i)}) with deg Y_i ≤ k−1, deg U ≤ 1 and
/// Σ_i Y_i U_j^{(i)} = 0 for every j.
///
/// For fixed Y the n equations involve disjoint U variables and are the same
/// equation, so the count is Σ_Y c(Y)^n with c(Y) the number of
/// (U^{(1)}..U^{(q)}) solving one of them. Writing U = a + bT, that equation
/// is linear in the 2q bits (a_i, b_i) with columns Y_i and T·Y_i, so
/// c(Y) = 2^{2q − rank}; every Y-tuple is visited.
pub fn count_solutions_brute(q: usize, n: usize, k: usize) -> Result<BigUint> {
    if q < 1 || n < 1 || k < 1 {
        return Err(Error::InvalidShape("q, n and k must be at least 1".into()));
    }
    let needed = (q * k + 2 * q * n) as u32;
    if needed > SOLUTION_BUDGET_BITS {
        return Err(Error::BudgetExceeded {
            needed,
            cap: SOLUTION_BUDGET_BITS,
        });
    }
    // histogram of rank{Y_i, T·Y_i}
    let mut hist = vec![0u64; 2 * q + 1];
    let mut cols = vec![0u64; 2 * q];
    for code in 0u64..(1u64 << (q * k)) {
        for i in 0..q {
            let y = (code >> (i * k)) & low_mask(k);
            cols[2 * i] = y;
            cols[2 * i + 1] = y << 1;
        }
        hist[rank_in_place(&mut cols)] += 1;
    }
    Ok(hist
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0)
        .map(|(r, &h)| BigUint::from(h) << (n * (2 * q - r)))
        .sum())
}

/// R = Σ_i Γ_i 2^{q(2n+k) − (k+1)n − iq}, which must come out integral.
pub fn r_from_distribution(q: usize, d: &RankDistribution) -> Result<BigInt> {
    d.require_exact()?;
    let (q, n, k) = (q as i64, d.n() as i64, d.k() as i64);
    let base = q * (2 * n + k) - (k + 1) * n;
    let sum: BigRational = d
        .counts()
        .iter()
        .enumerate()
        .map(|(i, c)| BigRational::from_integer(BigInt::from(c.clone())) * pow2(base - i as i64 * q))
        .fold(BigRational::zero(), |a, b| a + b);
    if !sum.is_integer() {
        return Err(Error::NonIntegral {
            context: format!("R from distribution (q={q}, n={n}, k={k})"),
            value: sum.to_string(),
        });
    }
    Ok(sum.to_integer())
}

/// 2^{2n+k−rank}, the closed value of the exponential sum.
pub fn exponential_sum_from_rank(n: usize, k: usize, rank: usize) -> BigInt {
    BigInt::one() << (2 * n + k - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_exact;
    use crate::persym::{build_stacked, tuple_from_index};

    #[test]
    fn clmul_basics() {
        // (1+T)(1+T) = 1+T² over GF(2)
        assert_eq!(clmul(0b11, 0b11), 0b101);
        assert_eq!(Poly2(0b11).checked_mul(Poly2(0b10)), Some(Poly2(0b110)));
        assert_eq!(Poly2(1 << 40).checked_mul(Poly2(1 << 30)), None);
        assert_eq!(Poly2::ZERO.degree(), None);
        assert_eq!(Poly2(0b100).degree(), Some(2));
    }

    #[test]
    fn char_e_examples() {
        assert_eq!(char_e(0, 3, Poly2(0b101), Poly2(0b11)).unwrap(), 1);
        assert_eq!(char_e(0b1011, 3, Poly2::ZERO, Poly2(0b11)).unwrap(), 1);
        assert_eq!(char_e(0b1011, 3, Poly2(0b11), Poly2::ZERO).unwrap(), 1);
        // t = T^{-1}, Y = U = 1
        assert_eq!(char_e(0b1, 3, Poly2::ONE, Poly2::ONE).unwrap(), -1);
        assert!(char_e(0, 3, Poly2(0b1000), Poly2::ONE).is_err());
        assert!(char_e(0, 3, Poly2::ONE, Poly2(0b100)).is_err());
        assert!(char_e(0b10000, 3, Poly2::ONE, Poly2::ONE).is_err());
    }

    #[test]
    fn expsum_examples() {
        let zero = SequenceTuple::new(2, vec![0]).unwrap();
        assert_eq!(exponential_sum_direct(&zero).unwrap(), BigInt::from(16));
        let t = SequenceTuple::from_coefficients(3, &[&[1, 0, 0, 1]]).unwrap();
        assert_eq!(exponential_sum_direct(&t).unwrap(), BigInt::from(8));
        let big = SequenceTuple::new(11, vec![0]).unwrap();
        assert!(exponential_sum_direct(&big).is_err());
    }

    #[test]
    fn expsum_matches_rank_for_single_block() {
        for k in 1..=3 {
            for idx in 0..(1u128 << (k + 1)) {
                let t = tuple_from_index(idx, 1, k).unwrap();
                let r = build_stacked(&t).rank();
                assert_eq!(
                    exponential_sum_direct(&t).unwrap(),
                    exponential_sum_from_rank(1, k, r)
                );
            }
        }
    }

    #[test]
    fn solution_count_examples() {
        assert_eq!(count_solutions_brute(1, 2, 3).unwrap(), BigUint::from(23u32));
        assert_eq!(count_solutions_brute(2, 1, 1).unwrap(), BigUint::from(28u32));
        assert_eq!(count_solutions_brute(1, 6, 1).unwrap(), BigUint::from(4097u32));
        assert!(matches!(
            count_solutions_brute(3, 6, 1),
            Err(Error::BudgetExceeded { needed: 39, .. })
        ));
    }

    /// Straight enumeration of every (Y, U) assignment, no factoring.
    fn count_solutions_naive(q: usize, n: usize, k: usize) -> u64 {
        let bits = q * k + 2 * q * n;
        (0u64..(1 << bits))
            .filter(|&code| {
                let y = |i: usize| (code >> (i * k)) & low_mask(k);
                let u = |i: usize, j: usize| (code >> (q * k + 2 * (i * n + j))) & 3;
                (0..n).all(|j| (0..q).fold(0, |acc, i| acc ^ clmul(y(i), u(i, j))) == 0)
            })
            .count() as u64
    }

    #[test]
    fn factored_count_matches_naive() {
        for (q, n, k) in [(1, 1, 1), (2, 1, 1), (1, 2, 3), (2, 2, 2), (3, 1, 2), (2, 3, 1)] {
            assert_eq!(
                count_solutions_brute(q, n, k).unwrap(),
                BigUint::from(count_solutions_naive(q, n, k)),
                "q={q} n={n} k={k}"
            );
        }
    }

    #[test]
    fn r_from_distribution_examples() {
        let d = RankDistribution::exact(1, 1, vec![1u32.into(), 3u32.into()]).unwrap();
        assert_eq!(r_from_distribution(2, &d).unwrap(), BigInt::from(28));
        let d6 = enumerate_exact(6, 2, 1).unwrap();
        assert_eq!(r_from_distribution(2, &d6).unwrap(), BigInt::from(16814464));
        for n in 1..=3 {
            for k in 1..=6 {
                let d = enumerate_exact(n, k, 1).unwrap();
                let want = (BigInt::one() << (2 * n)) + (BigInt::one() << k) - 1;
                assert_eq!(r_from_distribution(1, &d).unwrap(), want);
            }
        }
        let zeros = vec![BigUint::zero(); 4];
        let bad = RankDistribution::exact(2, 4, [vec![BigUint::one()], zeros].concat()).unwrap();
        assert!(matches!(r_from_distribution(1, &bad), Err(Error::NonIntegral { .. })));
    }
}
