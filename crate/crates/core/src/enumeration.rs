//! Exact and sampled rank distributions of stacked persymmetric matrices.
//!
//! The exact sweep walks the index space sequence by sequence, from the most
//! significant sequence down, carrying the row space of the blocks fixed so
//! far. Only the innermost sequence varies per candidate; there the rank
//! increment of its two rows is read off reduced unit vectors in Gray-code
//! order, so each candidate costs a couple of XORs.

use std::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::gf2matrix::{low_mask, rank_in_place, MAX_COLS};
use crate::persym::{block_rows, index_bits, SequenceTuple};

/// Default bit budget for exhaustive sweeps (n=6, k=4 is 30 bits).
pub const DEFAULT_MAX_BITS: u32 = 32;
/// Absolute cap, reachable only with `allow_huge`.
pub const HARD_MAX_BITS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sampled => "sampled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SampleMeta {
    pub samples: u64,
    pub seed: u64,
}

/// Sampled frequency of one rank with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    pub rank: usize,
    pub frequency: f64,
    pub std_error: f64,
}

/// Counts Γ_i of stacked matrices by rank i for fixed (n, k).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RankDistribution {
    n: usize,
    k: usize,
    counts: Vec<BigUint>,
    method: Method,
    sample_meta: Option<SampleMeta>,
}

pub fn max_rank(n: usize, k: usize) -> usize {
    (2 * n).min(k)
}

/// 2^{n(k+1)}, the number of sequence tuples.
pub fn tuple_count(n: usize, k: usize) -> BigUint {
    BigUint::one() << (n * (k + 1))
}

impl RankDistribution {
    pub fn exact(n: usize, k: usize, counts: Vec<BigUint>) -> Result<Self> {
        Self::build(n, k, counts, Method::Exact, None)
    }

    pub fn sampled(n: usize, k: usize, counts: Vec<BigUint>, meta: SampleMeta) -> Result<Self> {
        Self::build(n, k, counts, Method::Sampled, Some(meta))
    }

    fn build(
        n: usize,
        k: usize,
        counts: Vec<BigUint>,
        method: Method,
        sample_meta: Option<SampleMeta>,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidShape("n must be at least 1".into()));
        }
        if counts.len() != max_rank(n, k) + 1 {
            return Err(Error::InvalidShape(format!(
                "expected {} rank counts for n = {n}, k = {k}, got {}",
                max_rank(n, k) + 1,
                counts.len()
            )));
        }
        Ok(Self {
            n,
            k,
            counts,
            method,
            sample_meta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn count(&self, rank: usize) -> BigUint {
        self.counts.get(rank).cloned().unwrap_or_default()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn sample_meta(&self) -> Option<SampleMeta> {
        self.sample_meta
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// True when an exact distribution covers every tuple exactly once.
    pub fn is_complete(&self) -> bool {
        self.method == Method::Exact && self.total() == tuple_count(self.n, self.k)
    }

    pub fn require_exact(&self) -> Result<()> {
        match self.method {
            Method::Exact => Ok(()),
            Method::Sampled => Err(Error::SampledDistribution),
        }
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        let total = self.total();
        let total_f = biguint_to_f64(&total);
        self.counts
            .iter()
            .enumerate()
            .map(|(rank, c)| {
                let p = if total.is_zero() { 0.0 } else { biguint_to_f64(c) / total_f };
                let std_error = if total.is_zero() {
                    0.0
                } else {
                    (p * (1.0 - p) / total_f).sqrt()
                };
                Frequency {
                    rank,
                    frequency: p,
                    std_error,
                }
            })
            .collect()
    }
}

pub(crate) fn biguint_to_f64(v: &BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY)
}

/// Entrywise sum of exact partial distributions over disjoint index ranges.
pub fn merge(parts: &[RankDistribution]) -> Result<RankDistribution> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Mismatch("nothing to merge".into()))?;
    let mut counts = vec![BigUint::zero(); first.counts.len()];
    for p in parts {
        p.require_exact()?;
        if (p.n, p.k) != (first.n, first.k) {
            return Err(Error::Mismatch(format!(
                "cannot merge (n, k) = ({}, {}) into ({}, {})",
                p.n, p.k, first.n, first.k
            )));
        }
        for (acc, c) in counts.iter_mut().zip(&p.counts) {
            *acc += c;
        }
    }
    RankDistribution::exact(first.n, first.k, counts)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepLimits {
    /// Raises the bit budget from [`DEFAULT_MAX_BITS`] to [`HARD_MAX_BITS`].
    pub allow_huge: bool,
}

impl SweepLimits {
    pub fn cap(self) -> u32 {
        if self.allow_huge {
            HARD_MAX_BITS
        } else {
            DEFAULT_MAX_BITS
        }
    }

    pub fn check(self, n: usize, k: usize) -> Result<()> {
        if n < 1 || k < 1 {
            return Err(Error::InvalidShape("n and k must be at least 1".into()));
        }
        if k > MAX_COLS {
            return Err(Error::TooManyColumns { cols: k });
        }
        let bits = index_bits(n, k);
        if bits > self.cap() {
            let hint = if !self.allow_huge && bits <= HARD_MAX_BITS {
                " (pass --allow-huge to lift it)"
            } else {
                ""
            };
            return Err(Error::SearchSpaceTooLarge {
                bits,
                cap: self.cap(),
                hint,
            });
        }
        Ok(())
    }
}

pub fn enumerate_exact(n: usize, k: usize, worker_count: usize) -> Result<RankDistribution> {
    enumerate_exact_with(n, k, worker_count, SweepLimits::default())
}

pub fn enumerate_exact_with(
    n: usize,
    k: usize,
    worker_count: usize,
    limits: SweepLimits,
) -> Result<RankDistribution> {
    limits.check(n, k)?;
    if worker_count < 1 {
        return Err(Error::NoWorkers);
    }
    let shards = shard_ranges(index_bits(n, k), worker_count);
    let parts: Vec<RankDistribution> = if shards.len() == 1 {
        vec![enumerate_range(n, k, shards[0].clone())?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .map(|r| {
                    let r = r.clone();
                    scope.spawn(move || enumerate_range(n, k, r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let merged = merge(&parts)?;
    debug_assert!(merged.is_complete());
    Ok(merged)
}

/// Splits [0, 2^bits) into `workers` contiguous ranges.
pub fn shard_ranges(bits: u32, workers: usize) -> Vec<Range<u64>> {
    let total = 1u128 << bits;
    let w = workers as u128;
    (0..w)
        .map(|i| ((total * i / w) as u64)..((total * (i + 1) / w) as u64))
        .filter(|r| !r.is_empty() || workers == 1)
        .collect()
}

/// Exact partial distribution over the index range `range`.
pub fn enumerate_range(n: usize, k: usize, range: Range<u64>) -> Result<RankDistribution> {
    SweepLimits { allow_huge: true }.check(n, k)?;
    let end = 1u64 << index_bits(n, k);
    if range.end > end || range.start > range.end {
        return Err(Error::IndexOutOfRange {
            idx: range.end,
            bits: index_bits(n, k),
        });
    }
    let mut hist = [0u64; 65];
    if !range.is_empty() {
        let sweep = Sweep {
            k,
            width: k + 1,
            lo: range.start,
            hi: range.end,
        };
        sweep.descend(n - 1, 0, &Span::new(), &mut hist);
    }
    let counts = hist[..=max_rank(n, k)].iter().map(|&c| BigUint::from(c)).collect();
    RankDistribution::exact(n, k, counts)
}

/// Row space in reduced echelon form. Every pivot bit appears in exactly one
/// vector, which makes `reduce` linear.
#[derive(Clone, Copy)]
struct Span {
    vecs: [u64; 64],
    pivots: [u64; 64],
    len: usize,
}

impl Span {
    fn new() -> Self {
        Self {
            vecs: [0; 64],
            pivots: [0; 64],
            len: 0,
        }
    }

    #[inline(always)]
    fn reduce(&self, mut v: u64) -> u64 {
        for i in 0..self.len {
            if v & self.pivots[i] != 0 {
                v ^= self.vecs[i];
            }
        }
        v
    }

    #[inline(always)]
    fn insert(&mut self, v: u64) {
        let r = self.reduce(v);
        if r == 0 {
            return;
        }
        let p = r & r.wrapping_neg();
        for i in 0..self.len {
            if self.vecs[i] & p != 0 {
                self.vecs[i] ^= r;
            }
        }
        self.vecs[self.len] = r;
        self.pivots[self.len] = p;
        self.len += 1;
    }

    fn extend_from(&mut self, other: &Span) {
        self.len = other.len;
        self.vecs[..other.len].copy_from_slice(&other.vecs[..other.len]);
        self.pivots[..other.len].copy_from_slice(&other.pivots[..other.len]);
    }
}

struct Sweep {
    k: usize,
    width: usize,
    lo: u64,
    hi: u64,
}

impl Sweep {
    /// Chooses sequence `level` (0-based) with the higher sequences fixed in
    /// `base`; `span` holds their rows.
    fn descend(&self, level: usize, base: u64, span: &Span, hist: &mut [u64; 65]) {
        let shift = level * self.width;
        let values = 1u64 << self.width;
        // indices below `level` vary freely inside [base + v<<shift, base + (v+1)<<shift)
        let v_lo = if self.lo > base { (self.lo - base) >> shift } else { 0 };
        let v_hi = (((self.hi - 1 - base) >> shift) + 1).min(values);

        if level == 0 {
            if v_lo == 0 && v_hi == values {
                self.leaf_full(span, hist);
            } else {
                for v in v_lo..v_hi {
                    let [r1, r2] = block_rows(v, self.k);
                    let (a, b) = (span.reduce(r1), span.reduce(r2));
                    hist[span.len + increment(a, b)] += 1;
                }
            }
            return;
        }

        let mut child = Span::new();
        for v in v_lo..v_hi {
            child.extend_from(span);
            let [r1, r2] = block_rows(v, self.k);
            child.insert(r1);
            child.insert(r2);
            self.descend(level - 1, base + (v << shift), &child, hist);
        }
    }

    /// All 2^{k+1} values of the innermost sequence, visited in Gray-code order.
    fn leaf_full(&self, span: &Span, hist: &mut [u64; 65]) {
        let k = self.k;
        let mut unit = [0u64; 64];
        for (i, u) in unit.iter_mut().enumerate().take(k) {
            *u = span.reduce(1u64 << i);
        }
        let mut local = [0u64; 3];
        let (mut a, mut b) = (0u64, 0u64);
        local[0] += 1;
        for t in 1u64..(1u64 << self.width) {
            let i = t.trailing_zeros() as usize;
            // α_{i+1} sits in column i of row 1 and column i-1 of row 2
            if i < k {
                a ^= unit[i];
            }
            if i >= 1 {
                b ^= unit[i - 1];
            }
            local[increment(a, b)] += 1;
        }
        for (d, c) in local.iter().enumerate() {
            hist[span.len + d] += c;
        }
    }
}

/// Rank gained by adding two reduced rows to the span.
#[inline(always)]
fn increment(a: u64, b: u64) -> usize {
    usize::from(a != 0) + usize::from(b != 0 && b != a)
}

/// Draws `samples` uniform tuples with a seeded SplitMix64 stream and tallies ranks.
/// One generator word is drawn per sequence, in sequence order.
pub fn enumerate_sampled(n: usize, k: usize, samples: u64, seed: u64) -> Result<RankDistribution> {
    if n < 1 || k < 1 {
        return Err(Error::InvalidShape("n and k must be at least 1".into()));
    }
    if k > MAX_COLS {
        return Err(Error::TooManyColumns { cols: k });
    }
    if samples < 1 {
        return Err(Error::InvalidShape("samples must be at least 1".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mask = low_mask(k + 1);
    let mut rows = vec![0u64; 2 * n];
    let mut hist = vec![0u64; max_rank(n, k) + 1];
    for _ in 0..samples {
        for j in 0..n {
            let [r1, r2] = block_rows(rng.next_u64() & mask, k);
            rows[2 * j] = r1;
            rows[2 * j + 1] = r2;
        }
        hist[rank_in_place(&mut rows)] += 1;
    }
    let counts = hist.into_iter().map(BigUint::from).collect();
    RankDistribution::sampled(n, k, counts, SampleMeta { samples, seed })
}

/// `count` uniform tuples from the same SplitMix64 stream and draw order as
/// [`enumerate_sampled`].
pub fn seeded_tuples(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<SequenceTuple>> {
    if n < 1 || k < 1 {
        return Err(Error::InvalidShape("n and k must be at least 1".into()));
    }
    if k > MAX_COLS {
        return Err(Error::TooManyColumns { cols: k });
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mask = low_mask(k + 1);
    (0..count)
        .map(|_| SequenceTuple::new(k, (0..n).map(|_| rng.next_u64() & mask).collect()))
        .collect()
}
