//! Stacked persymmetric matrices and the tuple/index bijection.
//!
//! A block is the 2×k matrix read from one sequence α₁..α_{k+1}: the first
//! row is (α₁..α_k), the second (α₂..α_{k+1}). With bit `i-1` of the packed
//! sequence holding α_i, the rows are just `seq & mask` and `(seq >> 1) & mask`.

use crate::error::{Error, Result};
use crate::gf2matrix::{low_mask, BitMatrix, MAX_COLS};

/// n coefficient sequences of k+1 bits each.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SequenceTuple {
    n: usize,
    k: usize,
    seqs: Vec<u64>,
}

impl SequenceTuple {
    pub fn new(k: usize, seqs: Vec<u64>) -> Result<Self> {
        check_shape(seqs.len(), k)?;
        let mask = low_mask(k + 1);
        if let Some(j) = seqs.iter().position(|&s| s & !mask != 0) {
            return Err(Error::InvalidShape(format!(
                "sequence {j} has bits beyond position {k}"
            )));
        }
        Ok(Self {
            n: seqs.len(),
            k,
            seqs,
        })
    }

    /// Builds a tuple from explicit coefficient lists, `alphas[j][i-1]` = α_i of sequence j.
    pub fn from_coefficients(k: usize, alphas: &[&[u8]]) -> Result<Self> {
        let mut seqs = Vec::with_capacity(alphas.len());
        for (j, a) in alphas.iter().enumerate() {
            if a.len() != k + 1 {
                return Err(Error::InvalidShape(format!(
                    "sequence {j} has {} coefficients, expected {}",
                    a.len(),
                    k + 1
                )));
            }
            seqs.push(pack(a));
        }
        Self::new(k, seqs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seqs(&self) -> &[u64] {
        &self.seqs
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            n: self.n,
            k: self.k,
            seqs: order.iter().map(|&j| self.seqs[j]).collect(),
        }
    }
}

fn check_shape(n: usize, k: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidShape("n must be at least 1".into()));
    }
    if k < 1 {
        return Err(Error::InvalidShape("k must be at least 1".into()));
    }
    if k > MAX_COLS {
        return Err(Error::TooManyColumns { cols: k });
    }
    Ok(())
}

fn pack(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b & 1) << i))
}

/// The two packed rows of the block read from `seq`.
#[inline(always)]
pub fn block_rows(seq: u64, k: usize) -> [u64; 2] {
    let mask = low_mask(k);
    [seq & mask, (seq >> 1) & mask]
}

pub fn build_block(seq: u64, k: usize) -> Result<BitMatrix> {
    check_shape(1, k)?;
    if seq & !low_mask(k + 1) != 0 {
        return Err(Error::InvalidShape(format!(
            "sequence has bits beyond position {k}"
        )));
    }
    Ok(BitMatrix::from_rows_unchecked(block_rows(seq, k).to_vec(), k))
}

/// The 2n×k stack of blocks, sequence 1 on top.
pub fn build_stacked(t: &SequenceTuple) -> BitMatrix {
    let rows = t.seqs.iter().flat_map(|&s| block_rows(s, t.k)).collect();
    BitMatrix::from_rows_unchecked(rows, t.k)
}

/// Number of index bits, n(k+1).
pub fn index_bits(n: usize, k: usize) -> u32 {
    (n * (k + 1)) as u32
}

/// Sequence-major, little-endian: bit (j-1)(k+1)+(i-1) of `idx` is α_i of sequence j.
pub fn tuple_from_index(idx: u128, n: usize, k: usize) -> Result<SequenceTuple> {
    check_shape(n, k)?;
    let bits = index_bits(n, k);
    if bits > 128 {
        return Err(Error::InvalidShape(format!(
            "index space of {bits} bits does not fit 128-bit indices"
        )));
    }
    if bits < 128 && idx >> bits != 0 {
        return Err(Error::IndexOutOfRange {
            idx: idx.min(u64::MAX as u128) as u64,
            bits,
        });
    }
    let mask = low_mask(k + 1) as u128;
    let seqs = (0..n)
        .map(|j| ((idx >> (j * (k + 1))) & mask) as u64)
        .collect();
    Ok(SequenceTuple { n, k, seqs })
}

pub fn index_from_tuple(t: &SequenceTuple) -> u128 {
    t.seqs
        .iter()
        .enumerate()
        .fold(0u128, |acc, (j, &s)| acc | (u128::from(s) << (j * (t.k + 1))))
}
