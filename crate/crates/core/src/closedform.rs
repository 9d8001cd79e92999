//! Closed-form rank counts and moment identities, evaluated exactly.
//!
//! Every formula is stored as a literal coefficient table and turned into an
//! [`ExpPoly`] in x = 2^k on construction. The general-n forms carry
//! coefficients that are themselves polynomials in N = 2^n with a rational
//! prefactor; those prefactors must cancel for every integer n.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumeration::RankDistribution;
use crate::error::{Error, Result};
use crate::exppoly::{pow2, rat, ratio, ExpPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    /// Ranks 0..=7 for any number of blocks n.
    General(usize),
    N2,
    N3,
    /// Six blocks, ranks 0..=12.
    N6,
}

impl FamilyId {
    pub fn blocks(self) -> usize {
        match self {
            FamilyId::General(n) => n,
            FamilyId::N2 => 2,
            FamilyId::N3 => 3,
            FamilyId::N6 => 6,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::General(n) => write!(f, "general(n={n})"),
            FamilyId::N2 => f.write_str("n2"),
            FamilyId::N3 => f.write_str("n3"),
            FamilyId::N6 => f.write_str("n6"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RangePolicy {
    #[default]
    Enforce,
    /// Evaluate below k_min anyway, logging a warning.
    AllowBelow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub poly: ExpPoly,
    pub k_min: u32,
}

#[derive(Clone, Debug)]
pub struct ClosedFormFamily {
    id: FamilyId,
    entries: BTreeMap<usize, Entry>,
}

/// One x-power of a general-n form: prefactor · Σ_m c_m N^m (descending).
struct NTerm {
    x_power: u32,
    num: i64,
    den: i64,
    n_coeffs: &'static [i128],
}

const fn t(x_power: u32, num: i64, den: i64, n_coeffs: &'static [i128]) -> NTerm {
    NTerm {
        x_power,
        num,
        den,
        n_coeffs,
    }
}

const GENERAL: &[(u32, &[NTerm])] = &[
    (1, &[t(0, 1, 1, &[1])]),
    (2, &[t(0, 3, 1, &[1, -1])]),
    (3, &[t(1, 1, 1, &[2, -2]), t(0, 1, 1, &[7, -25, 18])]),
    (4, &[t(1, 1, 1, &[7, -21, 14]), t(0, 1, 1, &[15, -133, 294, -176])]),
    (
        5,
        &[
            t(2, 1, 3, &[2, -6, 4]),
            t(1, 1, 6, &[105, -783, 1614, -936]),
            t(0, 1, 6, &[186, -3630, 19028, -34464, 18880]),
        ],
    ),
    (
        6,
        &[
            t(2, 1, 2, &[5, -35, 70, -40]),
            t(1, 1, 4, &[155, -2565, 12530, -21960, 11840]),
            t(0, 1, 1, &[63, -2573, 29150, -123760, 203872, -106752]),
        ],
    ),
    (
        7,
        &[
            t(3, 1, 21, &[1, -7, 14, -8]),
            t(2, 1, 168, &[1085, -16723, 79086, -136472, 73024]),
            t(1, 1, 168, &[13671, -475881, 5026378, -20647816, 33473216, -17389568]),
            t(
                0,
                1,
                168,
                &[
                    21336, -1781640, 41896624, -382091648, 1470524160, -2311493632, 1182924800,
                ],
            ),
        ],
    ),
    (
        8,
        &[
            t(3, 31, 168, &[1, -15, 70, -120, 64]),
            t(2, 1, 96, &[1395, -45229, 462210, -1868680, 3005760, -1555456]),
            t(
                1,
                1,
                48,
                &[
                    8001, -571023, 12524806, -110524920, 418606144, -652818432, 332775424,
                ],
            ),
            t(
                0,
                1,
                21,
                &[
                    5355,
                    -904113,
                    43302294,
                    -817168432,
                    6743660640,
                    -96649567 * (1 << 8),
                    4637778 * (1 << 13),
                    -293263 * (1 << 16),
                ],
            ),
        ],
    ),
];

/// (k_min, overall factor, x-coefficients descending).
type TableRow = (u32, i128, &'static [i128]);

const N2_TABLE: &[TableRow] = &[
    (1, 1, &[1]),
    (2, 1, &[9]),
    (3, 1, &[6, 30]),
    (4, 1, &[42, -168]),
    (4, 1, &[4, -48, 128]),
];

const N3_TABLE: &[TableRow] = &[
    (1, 1, &[1]),
    (2, 1, &[21]),
    (3, 1, &[14, 266]),
    (4, 1, &[294, 1344]),
    (5, 1, &[28, 2604, -22624]),
    (6, 1, &[420, -10080, 53760]),
    (6, 1, &[8, -448, 7168, -32768]),
];

const N6_TABLE: &[TableRow] = &[
    (1, 1, &[1]),
    (2, 1, &[189]),
    (3, 1, &[126, 27090]),
    (4, 1, &[27342, 3406032]),
    (5, 1, &[2604, 4070052, 374121888]),
    (6, 1, &[585900, 494499600, 123537015 * (1 << 8)]),
    (
        7,
        1,
        &[11160, 84135240, (1 << 8) * 184392495, 29391255 * (1 << 15)],
    ),
    (
        8,
        1,
        &[
            2421720,
            277589655 * (1 << 5),
            2431729125 * (1 << 10),
            -2996595315 * (1 << 16),
        ],
    ),
    (
        9,
        1,
        &[
            10416,
            216944 * 1395,
            2155757205 * (1 << 8),
            -6999385995 * (1 << 14),
            4767802914 * (1 << 20),
        ],
    ),
    (
        10,
        1,
        &[
            1968624,
            15196608 * 1395,
            -2387571795 * (1 << 12),
            4814516070 * (1 << 18),
            -2760151464 * (1 << 24),
        ],
    ),
    (
        11,
        2016,
        &[
            1,
            81685,
            -79052480,
            (1 << 13) * 2888735,
            -1239163 * (1 << 21),
            (1 << 30) * 82645,
        ],
    ),
    (
        12,
        256032,
        &[1, -1984, 1269760, -325058560, 31744 * (1 << 20), -(1 << 40)],
    ),
    (
        12,
        1 << 6,
        &[
            1,
            -63 * (1 << 6),
            651 * (1 << 13),
            -1395 * (1 << 21),
            651 * (1 << 30),
            -63 * (1 << 40),
            1 << 51,
        ],
    ),
];

fn general_entry(n: usize, k_min: u32, terms: &[NTerm]) -> Entry {
    let big_n = BigInt::one() << n;
    let mut poly = ExpPoly::zero();
    for term in terms {
        let inner = term
            .n_coeffs
            .iter()
            .fold(BigInt::zero(), |acc, &c| acc * &big_n + BigInt::from(c));
        poly.add_term(term.x_power, ratio(inner * term.num, term.den));
    }
    Entry { poly, k_min }
}

fn table_entry(&(k_min, factor, coeffs): &TableRow) -> Entry {
    Entry {
        poly: ExpPoly::from_descending(coeffs).scale(&rat(factor)),
        k_min,
    }
}

impl ClosedFormFamily {
    pub fn new(id: FamilyId) -> Result<Self> {
        let entries: BTreeMap<usize, Entry> = match id {
            FamilyId::General(n) => {
                if n < 1 {
                    return Err(Error::InvalidShape("n must be at least 1".into()));
                }
                GENERAL
                    .iter()
                    .enumerate()
                    .map(|(i, (k_min, terms))| (i, general_entry(n, *k_min, terms)))
                    .collect()
            }
            FamilyId::N2 => N2_TABLE.iter().map(table_entry).enumerate().collect(),
            FamilyId::N3 => N3_TABLE.iter().map(table_entry).enumerate().collect(),
            FamilyId::N6 => N6_TABLE.iter().map(table_entry).enumerate().collect(),
        };
        Ok(Self { id, entries })
    }

    pub fn general(n: usize) -> Result<Self> {
        Self::new(FamilyId::General(n))
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn entry(&self, i: usize) -> Option<&Entry> {
        self.entries.get(&i)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Entry)> {
        self.entries.iter().map(|(&i, e)| (i, e))
    }

    pub fn max_rank(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn in_range(&self, i: usize, k: u32) -> bool {
        self.entry(i).is_some_and(|e| k >= e.k_min)
    }

    pub fn poly(&self, i: usize) -> Result<&ExpPoly> {
        self.entry(i).map(|e| &e.poly).ok_or_else(|| Error::NoClosedForm {
            family: self.id.to_string(),
            i,
        })
    }

    pub fn gamma(&self, i: usize, k: u32, policy: RangePolicy) -> Result<BigInt> {
        let entry = self.entry(i).ok_or_else(|| Error::NoClosedForm {
            family: self.id.to_string(),
            i,
        })?;
        if k < entry.k_min {
            match policy {
                RangePolicy::Enforce => {
                    return Err(Error::BelowValidityRange {
                        family: self.id.to_string(),
                        i,
                        k,
                        k_min: entry.k_min,
                    })
                }
                RangePolicy::AllowBelow => log::warn!(
                    "evaluating {} rank {i} at k = {k}, below its validity range k >= {}",
                    self.id,
                    entry.k_min
                ),
            }
        }
        entry.poly.eval_integer(k)
    }
}

pub fn gamma_general(n: usize, i: usize, k: u32, policy: RangePolicy) -> Result<BigInt> {
    ClosedFormFamily::general(n)?.gamma(i, k, policy)
}

pub fn gamma_table(family: FamilyId, i: usize, k: u32, policy: RangePolicy) -> Result<BigInt> {
    ClosedFormFamily::new(family)?.gamma(i, k, policy)
}

/// Γ_{2n} = 2^n ∏_{j=1}^{n} (x − 2^{2n−j}) as a polynomial in x.
pub fn full_rank_poly(n: usize) -> ExpPoly {
    let roots: Vec<BigRational> = (1..=n).map(|j| pow2((2 * n - j) as i64)).collect();
    ExpPoly::from_roots(&roots).scale(&pow2(n as i64))
}

/// The literal product 2^n ∏_{j=1}^{n} (2^k − 2^{2n−j}); not clamped at zero.
pub fn full_rank_count(n: usize, k: u32) -> BigInt {
    let x = BigInt::one() << k;
    (1..=n).fold(BigInt::one() << n, |acc, j| acc * (&x - (BigInt::one() << (2 * n - j))))
}

/// Σ_i Γ_i 2^{(2n−i)s}: the s-th moment scaled by 2^{2ns}.
pub fn moment_lhs(d: &RankDistribution, s: u32) -> Result<BigInt> {
    d.require_exact()?;
    let n = d.n();
    let sum: BigUint = d
        .counts()
        .iter()
        .enumerate()
        .map(|(i, c)| c << ((2 * n - i) * s as usize))
        .sum();
    Ok(sum.into())
}

/// Closed-form moment (s = 0, 1, 2) scaled by 2^{2ns}.
pub fn moment_rhs(n: usize, k: u32, s: u32) -> Result<BigInt> {
    let (n, k) = (n as i64, i64::from(k));
    let p = pow2;
    let value = match s {
        0 => p((k + 1) * n),
        1 => (p(n + k * (n - 1)) + p((k - 1) * n) - p((k - 1) * n - k)) * p(2 * n),
        2 => {
            let three = rat(3);
            let six = rat(6);
            (p(n + k * (n - 2))
                + p(-n + k * (n - 2)) * (&three * p(k) - &three)
                + p(-2 * n + k * (n - 2)) * (&six * p(k - 1) - &six)
                + p(-3 * n + k * n)
                - &six * p(n * (k - 3) - k)
                + rat(8) * p(-3 * n + k * (n - 2)))
                * p(4 * n)
        }
        _ => return Err(Error::InvalidShape(format!("moment order {s} not in 0..=2"))),
    };
    if !value.is_integer() {
        return Err(Error::NonIntegral {
            context: format!("moment s={s} at n={n}, k={k}"),
            value: value.to_string(),
        });
    }
    Ok(value.to_integer())
}

/// The scaled moment right side as a polynomial in x; needs n ≥ 2 so every
/// power of x is nonnegative.
pub fn moment_rhs_poly(n: usize, s: u32) -> Result<ExpPoly> {
    if n < 2 {
        return Err(Error::InvalidShape("moment polynomials need n >= 2".into()));
    }
    let nn = n as u32;
    let p = |e: usize| pow2(e as i64);
    let m = |c: BigRational, j: u32| ExpPoly::monomial(c, j);
    Ok(match s {
        0 => m(p(n), nn),
        1 => [m(p(3 * n), nn - 1), m(p(n), nn), m(-p(n), nn - 1)].into_iter().sum(),
        2 => [
            m(p(5 * n), nn - 2),
            m(rat(3) * p(3 * n), nn - 1),
            m(rat(-3) * p(3 * n), nn - 2),
            m(rat(3) * p(2 * n), nn - 1),
            m(rat(-6) * p(2 * n), nn - 2),
            m(p(n), nn),
            m(rat(-6) * p(n), nn - 1),
            m(rat(8) * p(n), nn - 2),
        ]
        .into_iter()
        .sum(),
        _ => return Err(Error::InvalidShape(format!("moment order {s} not in 0..=2"))),
    })
}

/// Solutions of the single-Y system: 2^{2n} + 2^k − 1.
pub fn q1_solution_count(n: usize, k: u32) -> BigInt {
    (BigInt::one() << (2 * n)) + (BigInt::one() << k) - 1
}

/// Published n = 6, k = 6 values, written as the product they were printed as.
pub const PUBLISHED_N6_K6: &[(usize, &str, u128)] = &[
    (0, "1", 1),
    (1, "189", 189),
    (2, "35154", 35154),
    (3, "5155920", 5155920),
    (4, "645271200", 645271200),
    (5, "256536315*2^8", 256536315 << 8),
    (6, "2^14*264387375", 264387375 << 14),
];

/// One cell of an emitted Γ table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaRow {
    pub family: FamilyId,
    pub i: usize,
    pub k: u32,
    /// `None` when below range and the policy forbids evaluation.
    pub value: Option<BigInt>,
    pub in_range: bool,
}

pub fn gamma_rows(
    family: &ClosedFormFamily,
    ks: impl IntoIterator<Item = u32>,
    ranks: Option<&[usize]>,
    policy: RangePolicy,
) -> Result<Vec<GammaRow>> {
    let ranks: Vec<usize> = match ranks {
        Some(r) => r.to_vec(),
        None => family.entries().map(|(i, _)| i).collect(),
    };
    let mut rows = Vec::new();
    for k in ks {
        for &i in &ranks {
            let in_range = family.in_range(i, k);
            let value = if in_range || policy == RangePolicy::AllowBelow {
                Some(family.gamma(i, k, policy)?)
            } else if family.entry(i).is_none() {
                return Err(Error::NoClosedForm {
                    family: family.id().to_string(),
                    i,
                });
            } else {
                None
            };
            rows.push(GammaRow {
                family: family.id(),
                i,
                k,
                value,
                in_range,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "family,i,k,value,in_range";

pub fn to_csv(rows: &[GammaRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let value = r.value.as_ref().map(ToString::to_string).unwrap_or_default();
        let family = match r.family {
            FamilyId::General(n) => format!("general-n{n}"),
            other => other.to_string(),
        };
        out.push_str(&format!("{family},{},{},{value},{}\n", r.i, r.k, r.in_range));
    }
    out
}
