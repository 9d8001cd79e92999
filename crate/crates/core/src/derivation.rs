//! Recovers the six-block counts for ranks 8..=12 from their factored shape
//! and the three moment identities.
//!
//! Each Γ_i for i in 7..=12 is written as ∏_{j=6}^{i−1} (x − 2^j) times a
//! residual polynomial of small degree. Γ₀..Γ₇ come from the general-n forms
//! at n = 6 and Γ₁₂ from the full-rank product, leaving eight residual
//! coefficients. Matching every power of x in the three moment identities
//! gives 21 linear equations; all of them are kept and the solver checks
//! that the redundant ones agree.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::closedform::{full_rank_poly, moment_rhs_poly, ClosedFormFamily, FamilyId};
use crate::error::{Error, Result};
use crate::exppoly::{pow2, ExpPoly};

const BLOCKS: usize = 6;
const TOP_RANK: usize = 2 * BLOCKS;
const FIRST_FACTORED: usize = 7;

/// Factored shape of one rank's count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankShape {
    pub rank: usize,
    /// Exponents j of the vanishing factors (x − 2^j).
    pub root_exponents: Vec<u32>,
    pub residual_degree: u32,
    /// Residual already fixed by a known closed form.
    pub known_residual: Option<ExpPoly>,
}

impl RankShape {
    pub fn vanishing_factor(&self) -> ExpPoly {
        let roots: Vec<BigRational> = self
            .root_exponents
            .iter()
            .map(|&j| pow2(i64::from(j)))
            .collect();
        ExpPoly::from_roots(&roots)
    }

    pub fn coefficient_count(&self) -> usize {
        self.residual_degree as usize + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnknownLabel {
    pub rank: usize,
    /// Power of x within the residual.
    pub power: u32,
}

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {} residual x^{}", self.rank, self.power)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzUnknowns {
    pub shapes: Vec<RankShape>,
}

impl AnsatzUnknowns {
    /// Shapes for ranks 7..=12 with Γ₇ and Γ₁₂ filled in from the known forms.
    pub fn six_block(known: &KnownForms) -> Result<Self> {
        let residual_degree = |i: usize| match i {
            7 | 8 => 2,
            9 | 10 => 1,
            _ => 0,
        };
        let mut shapes: Vec<RankShape> = (FIRST_FACTORED..=TOP_RANK)
            .map(|rank| RankShape {
                rank,
                root_exponents: (BLOCKS as u32..rank as u32).collect(),
                residual_degree: residual_degree(rank),
                known_residual: None,
            })
            .collect();
        let gamma7 = known.low.get(FIRST_FACTORED).ok_or_else(|| {
            Error::InvalidShape("known forms must include rank 7".into())
        })?;
        shapes[0].known_residual = Some(exact_quotient(gamma7, &shapes[0].vanishing_factor(), 7)?);
        let last = shapes.len() - 1;
        shapes[last].known_residual =
            Some(exact_quotient(&known.full_rank, &shapes[last].vanishing_factor(), 12)?);
        Ok(Self { shapes })
    }

    pub fn total_coefficients(&self) -> usize {
        self.shapes.iter().map(RankShape::coefficient_count).sum()
    }

    pub fn unknowns(&self) -> Vec<UnknownLabel> {
        self.shapes
            .iter()
            .filter(|s| s.known_residual.is_none())
            .flat_map(|s| {
                (0..=s.residual_degree)
                    .rev()
                    .map(move |power| UnknownLabel { rank: s.rank, power })
            })
            .collect()
    }

    pub fn shape(&self, rank: usize) -> Option<&RankShape> {
        self.shapes.iter().find(|s| s.rank == rank)
    }
}

/// Divides `p` by a monic `d`, failing unless the remainder is zero.
fn exact_quotient(p: &ExpPoly, d: &ExpPoly, rank: usize) -> Result<ExpPoly> {
    let dd = d.degree().unwrap_or(0);
    let mut rem = p.clone();
    let mut quot = ExpPoly::zero();
    while let Some(deg) = rem.degree() {
        if deg < dd {
            break;
        }
        let c = rem.coeff(deg) / d.coeff(dd);
        let term = ExpPoly::monomial(c, deg - dd);
        rem = &rem - &(&term * d);
        quot = &quot + &term;
    }
    if !rem.is_zero() {
        return Err(Error::Mismatch(format!(
            "rank {rank} form is not divisible by its vanishing factor; remainder {rem}"
        )));
    }
    Ok(quot)
}

/// Closed forms the derivation takes as given.
#[derive(Clone, Debug)]
pub struct KnownForms {
    /// Γ₀..=Γ₇.
    pub low: Vec<ExpPoly>,
    /// Γ₁₂.
    pub full_rank: ExpPoly,
}

impl KnownForms {
    /// Γ₀..Γ₇ from the general-n forms at n = 6, Γ₁₂ from the product formula.
    pub fn standard() -> Result<Self> {
        let general = ClosedFormFamily::general(BLOCKS)?;
        let low = (0..=FIRST_FACTORED)
            .map(|i| general.poly(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            low,
            full_rank: full_rank_poly(BLOCKS),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquationLabel {
    /// Moment order s.
    pub moment: u32,
    pub power: u32,
}

impl fmt::Display for EquationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "moment s={} coefficient of x^{}", self.moment, self.power)
    }
}

#[derive(Clone, Debug)]
pub struct LinearSystemQ {
    pub matrix: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    pub equations: Vec<EquationLabel>,
    pub unknowns: Vec<UnknownLabel>,
    pub ansatz: AnsatzUnknowns,
    pub known: KnownForms,
}

impl LinearSystemQ {
    pub fn equation_count(&self) -> usize {
        self.rhs.len()
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Residuals A·v − b of a candidate assignment.
    pub fn residuals(&self, values: &[BigRational]) -> Vec<BigRational> {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                row.iter()
                    .zip(values)
                    .fold(BigRational::zero(), |acc, (a, v)| acc + a * v)
                    - b
            })
            .collect()
    }
}

fn moment_weight(rank: usize, s: u32) -> BigRational {
    pow2(((TOP_RANK - rank) as u32 * s) as i64)
}

pub fn assemble_system() -> Result<LinearSystemQ> {
    assemble_system_with(KnownForms::standard()?)
}

pub fn assemble_system_with(known: KnownForms) -> Result<LinearSystemQ> {
    let ansatz = AnsatzUnknowns::six_block(&known)?;
    let unknowns = ansatz.unknowns();
    let top_power = TOP_RANK as u32 / 2;

    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    let mut equations = Vec::new();
    for s in 0..3u32 {
        let mut known_sum = ExpPoly::zero();
        for (i, p) in known.low.iter().enumerate() {
            known_sum = &known_sum + &p.scale(&moment_weight(i, s));
        }
        known_sum = &known_sum + &known.full_rank.scale(&moment_weight(TOP_RANK, s));
        let target = &moment_rhs_poly(BLOCKS, s)? - &known_sum;

        let columns: Vec<ExpPoly> = unknowns
            .iter()
            .map(|u| {
                let shape = ansatz.shape(u.rank).expect("unknown rank has a shape");
                (&shape.vanishing_factor() * &ExpPoly::monomial(BigRational::one(), u.power))
                    .scale(&moment_weight(u.rank, s))
            })
            .collect();
        for power in 0..=top_power {
            matrix.push(columns.iter().map(|c| c.coeff(power)).collect());
            rhs.push(target.coeff(power));
            equations.push(EquationLabel { moment: s, power });
        }
    }
    Ok(LinearSystemQ {
        matrix,
        rhs,
        equations,
        unknowns,
        ansatz,
        known,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub unknowns: Vec<UnknownLabel>,
    pub values: Vec<BigRational>,
}

impl Assignment {
    pub fn get(&self, rank: usize, power: u32) -> Option<&BigRational> {
        self.unknowns
            .iter()
            .position(|u| u.rank == rank && u.power == power)
            .map(|i| &self.values[i])
    }

    /// Residual polynomial assembled from the solved coefficients of `rank`.
    pub fn residual(&self, rank: usize) -> ExpPoly {
        ExpPoly::from_pairs(
            self.unknowns
                .iter()
                .zip(&self.values)
                .filter(|(u, _)| u.rank == rank)
                .map(|(u, v)| (u.power, v.clone()))
                .collect(),
        )
    }
}

/// Row echelon form of an integer matrix by fraction-free elimination.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// Original index of each row after pivoting swaps.
    origin: Vec<usize>,
    pivot_cols: Vec<usize>,
}

/// Bareiss elimination over the first `cols` columns of `rows`. Every update
/// divides exactly by the previous pivot, so entries stay minors of the input.
fn bareiss(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let m = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut origin: Vec<usize> = (0..m).collect();
    let mut pivot_cols = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        origin.swap(r, p);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..width {
                let num = &pivot_row[col] * &row[j] - &factor * &pivot_row[j];
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division not exact");
                row[j] = q;
            }
            row[col] = BigInt::zero();
        }
        prev = rows[r][col].clone();
        pivot_cols.push(col);
        r += 1;
    }
    Echelon {
        rows,
        origin,
        pivot_cols,
    }
}

fn row_to_integers(row: &[BigRational], b: &BigRational) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(std::iter::once(b))
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter()
        .chain(std::iter::once(b))
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// Solves the (possibly over-determined) system exactly. Every equation is
/// used; a rank deficit or a contradictory equation is an error.
pub fn solve_exact(sys: &LinearSystemQ) -> Result<Assignment> {
    let cols = sys.unknown_count();
    let rows: Vec<Vec<BigInt>> = sys
        .matrix
        .iter()
        .zip(&sys.rhs)
        .map(|(row, b)| row_to_integers(row, b))
        .collect();
    let ech = bareiss(rows, cols);
    let rank = ech.pivot_cols.len();

    let mut bad: Vec<usize> = ech.rows[rank..]
        .iter()
        .zip(&ech.origin[rank..])
        .filter(|(row, _)| !row[cols].is_zero())
        .map(|(_, &o)| o)
        .collect();
    if !bad.is_empty() {
        bad.sort_unstable();
        return Err(Error::Inconsistent { equations: bad });
    }
    if rank < cols {
        return Err(Error::Underdetermined {
            rank,
            unknowns: cols,
        });
    }

    // back substitution on the square upper-triangular part
    let mut values = vec![BigRational::zero(); cols];
    for r in (0..rank).rev() {
        let row = &ech.rows[r];
        let c = ech.pivot_cols[r];
        let mut acc = BigRational::from_integer(row[cols].clone());
        for j in c + 1..cols {
            acc -= BigRational::from_integer(row[j].clone()) * &values[j];
        }
        values[c] = acc / BigRational::from_integer(row[c].clone());
    }

    let residuals = sys.residuals(&values);
    if let Some(i) = residuals.iter().position(|r| !r.is_zero()) {
        return Err(Error::Inconsistent { equations: vec![i] });
    }
    Ok(Assignment {
        unknowns: sys.unknowns.clone(),
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientMismatch {
    pub rank: usize,
    pub power: u32,
    pub derived: BigRational,
    pub stored: BigRational,
}

/// Coefficient-level differences between two families, rank by rank.
pub fn diff_families(
    derived: &BTreeMap<usize, ExpPoly>,
    stored: &BTreeMap<usize, ExpPoly>,
) -> Vec<CoefficientMismatch> {
    let ranks: std::collections::BTreeSet<usize> =
        derived.keys().chain(stored.keys()).copied().collect();
    let zero = ExpPoly::zero();
    ranks
        .into_iter()
        .flat_map(|rank| {
            let a = derived.get(&rank).unwrap_or(&zero);
            let b = stored.get(&rank).unwrap_or(&zero);
            a.diff(b)
                .into_iter()
                .map(move |(power, derived, stored)| CoefficientMismatch {
                    rank,
                    power,
                    derived,
                    stored,
                })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DerivationReport {
    /// Expanded Γ₇..=Γ₁₂ from the solved residuals.
    pub derived: BTreeMap<usize, ExpPoly>,
    /// Factored view: rank → (vanishing factor exponents, residual).
    pub factored: BTreeMap<usize, (Vec<u32>, ExpPoly)>,
    /// Differences against the stored six-block table, ranks 7..=12.
    pub mismatches: Vec<CoefficientMismatch>,
    /// Differences between the general-n Γ₇ at n = 6 and the stored Γ₇.
    pub gamma7_check: Vec<CoefficientMismatch>,
}

impl DerivationReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.gamma7_check.is_empty()
    }
}

pub fn expand_and_compare(sys: &LinearSystemQ, assignment: &Assignment) -> Result<DerivationReport> {
    let stored_family = ClosedFormFamily::new(FamilyId::N6)?;
    let mut derived = BTreeMap::new();
    let mut factored = BTreeMap::new();
    for shape in &sys.ansatz.shapes {
        let residual = match &shape.known_residual {
            Some(r) => r.clone(),
            None => assignment.residual(shape.rank),
        };
        derived.insert(shape.rank, &shape.vanishing_factor() * &residual);
        factored.insert(shape.rank, (shape.root_exponents.clone(), residual));
    }
    let stored: BTreeMap<usize, ExpPoly> = (FIRST_FACTORED..=TOP_RANK)
        .map(|i| Ok((i, stored_family.poly(i)?.clone())))
        .collect::<Result<_>>()?;
    let mismatches = diff_families(&derived, &stored);

    let general7 = BTreeMap::from([(FIRST_FACTORED, sys.known.low[FIRST_FACTORED].clone())]);
    let stored7 = BTreeMap::from([(FIRST_FACTORED, stored[&FIRST_FACTORED].clone())]);
    let gamma7_check = diff_families(&general7, &stored7);
    Ok(DerivationReport {
        derived,
        factored,
        mismatches,
        gamma7_check,
    })
}

/// LHS − RHS of the three scaled moment identities for a full six-block
/// family Γ₀..=Γ₁₂; all zero when the family satisfies them symbolically.
pub fn moment_defects(family: &BTreeMap<usize, ExpPoly>) -> Result<Vec<ExpPoly>> {
    (0..3u32)
        .map(|s| {
            let lhs: ExpPoly = family
                .iter()
                .map(|(&i, p)| p.scale(&moment_weight(i, s)))
                .sum();
            Ok(&lhs - &moment_rhs_poly(BLOCKS, s)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::{rat, ratio};

    #[test]
    fn ansatz_counts() {
        let a = AnsatzUnknowns::six_block(&KnownForms::standard().unwrap()).unwrap();
        assert_eq!(a.total_coefficients(), 12);
        assert_eq!(a.unknowns().len(), 8);
        assert_eq!(a.shape(10).unwrap().root_exponents, vec![6, 7, 8, 9]);
    }

    #[test]
    fn system_shape() {
        let sys = assemble_system().unwrap();
        assert_eq!(sys.unknown_count(), 8);
        assert_eq!(sys.equation_count(), 21);
    }

    #[test]
    fn zeroth_moment_target() {
        // with everything known set to zero, the s=0 right side is 64·x^6
        let known = KnownForms {
            low: vec![ExpPoly::zero(); 8],
            full_rank: ExpPoly::zero(),
        };
        let sys = assemble_system_with(known).unwrap();
        for (eq, b) in sys.equations.iter().zip(&sys.rhs) {
            if eq.moment == 0 {
                let want = if eq.power == 6 { rat(64) } else { rat(0) };
                assert_eq!(b, &want, "{eq}");
            }
        }
    }

    #[test]
    fn published_values_balance_every_equation() {
        let sys = assemble_system().unwrap();
        let stored = ClosedFormFamily::new(FamilyId::N6).unwrap();
        let values: Vec<BigRational> = sys
            .unknowns
            .iter()
            .map(|u| {
                let shape = sys.ansatz.shape(u.rank).unwrap();
                let q = exact_quotient(stored.poly(u.rank).unwrap(), &shape.vanishing_factor(), u.rank)
                    .unwrap();
                q.coeff(u.power)
            })
            .collect();
        assert!(sys.residuals(&values).iter().all(Zero::is_zero));
    }

    #[test]
    fn solves_to_published_coefficients() {
        let sys = assemble_system().unwrap();
        let a = solve_exact(&sys).unwrap();
        assert_eq!(a.get(8, 2), Some(&rat(10416)));
        assert_eq!(a.get(11, 0), Some(&rat(256032)));
        assert_eq!(a.get(10, 1), Some(&rat(2016)));
        let report = expand_and_compare(&sys, &a).unwrap();
        assert!(report.is_clean(), "{:?}", report.mismatches);
        let g10 = &report.derived[&10];
        assert_eq!(g10.coeff(4) / g10.coeff(5), rat(81685));
        let g12 = &report.derived[&12];
        assert_eq!(g12.coeff(0), rat(BigInt::one() << 57));
        assert_eq!(g12.coeff(5), rat(-(64 * 63 * 64)));
    }

    #[test]
    fn reflexive_diff_is_empty() {
        let f = ClosedFormFamily::new(FamilyId::N6).unwrap();
        let t: BTreeMap<usize, ExpPoly> = f.entries().map(|(i, e)| (i, e.poly.clone())).collect();
        assert!(diff_families(&t, &t).is_empty());
    }

    #[test]
    fn corrupted_input_is_inconsistent() {
        let mut known = KnownForms::standard().unwrap();
        known.low[3].add_term(1, rat(1));
        let err = solve_exact(&assemble_system_with(known).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Inconsistent { .. }), "{err}");
    }

    #[test]
    fn rank_deficit_is_underdetermined() {
        // an extra unknown that no equation sees
        let mut sys = assemble_system().unwrap();
        for row in &mut sys.matrix {
            row.push(rat(0));
        }
        sys.unknowns.push(UnknownLabel { rank: 99, power: 0 });
        assert!(matches!(
            solve_exact(&sys),
            Err(Error::Underdetermined { rank: 8, unknowns: 9 })
        ));
    }

    /// Plain rational Gauss-Jordan, independent of the Bareiss path.
    #[allow(clippy::needless_range_loop)]
    fn rational_rank(m: &[Vec<BigRational>]) -> usize {
        let mut m = m.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            for i in 0..m.len() {
                if i != r && !m[i][c].is_zero() {
                    let f = &m[i][c] / &m[r][c];
                    for j in 0..cols {
                        let d = &f * &m[r][j];
                        m[i][j] -= d;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn bareiss_rank_matches_rational_elimination() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(5);
        for _ in 0..200 {
            let rows = 1 + (rng.next_u64() % 6) as usize;
            let cols = 1 + (rng.next_u64() % 6) as usize;
            let m: Vec<Vec<BigRational>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| {
                            // sparse small entries produce plenty of rank deficits
                            let v = (rng.next_u64() % 7) as i64 - 3;
                            if rng.next_u64() % 3 == 0 {
                                rat(0)
                            } else {
                                ratio(v, 1 + (rng.next_u64() % 3) as i64)
                            }
                        })
                        .collect()
                })
                .collect();
            let ints: Vec<Vec<BigInt>> = m
                .iter()
                .map(|r| row_to_integers(r, &rat(0)))
                .collect();
            assert_eq!(bareiss(ints, cols).pivot_cols.len(), rational_rank(&m));
        }
    }

    #[test]
    fn vanishing_points() {
        let sys = assemble_system().unwrap();
        let a = solve_exact(&sys).unwrap();
        let report = expand_and_compare(&sys, &a).unwrap();
        for (&rank, p) in &report.derived {
            for j in 6..rank as u32 {
                assert!(p.eval_pow2(i64::from(j)).is_zero(), "rank {rank} at k={j}");
            }
        }
    }
}
