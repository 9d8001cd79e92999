//! Dense matrices over GF(2) with one machine word per row.
//!
//! Every matrix the toolkit ranks is at most 24 rows by 63 columns, so a row
//! is a single `u64` with bit `j` holding the entry in column `j`. Rank is
//! computed by row-echelon elimination pivoting on the lowest set bit.

use std::fmt;

use crate::error::{Error, Result};

/// Widest matrix representable with one word per row.
pub const MAX_COLS: usize = 63;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    /// Builds a matrix from packed rows. Rejects any row with a bit at or
    /// beyond `cols`.
    pub fn from_rows(rows: Vec<u64>, cols: usize) -> Result<Self> {
        if cols > MAX_COLS {
            return Err(Error::TooManyColumns { cols });
        }
        let mask = low_mask(cols);
        if let Some(row) = rows.iter().position(|&r| r & !mask != 0) {
            return Err(Error::RowOutOfRange { row, cols });
        }
        Ok(Self { cols, rows })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_rows(vec![0; rows], cols)
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<u64>, cols: usize) -> Self {
        debug_assert!(rows.iter().all(|&r| r & !low_mask(cols) == 0));
        Self { cols, rows }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_bits(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(col < self.cols, "column {col} out of range ({})", self.cols);
        (self.rows[row] >> col) & 1 == 1
    }

    /// Row rank over GF(2). Works on a stack copy for matrices of up to 64
    /// rows, so the common case never allocates.
    pub fn rank(&self) -> usize {
        if self.rows.len() <= 64 {
            let mut scratch = [0u64; 64];
            let scratch = &mut scratch[..self.rows.len()];
            scratch.copy_from_slice(&self.rows);
            rank_in_place(scratch)
        } else {
            rank_in_place(&mut self.rows.clone())
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
    }

    /// Adds row `src` into row `dst`.
    pub fn add_row(&mut self, src: usize, dst: usize) {
        let s = self.rows[src];
        self.rows[dst] ^= s;
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for &r in &self.rows {
            for j in 0..self.cols {
                f.write_str(if (r >> j) & 1 == 1 { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Rank of the rows in `scratch`, destroying its contents.
#[inline]
pub fn rank_in_place(scratch: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..scratch.len() {
        let pivot = scratch[i];
        if pivot == 0 {
            continue;
        }
        rank += 1;
        let low = pivot & pivot.wrapping_neg();
        for r in &mut scratch[i + 1..] {
            if *r & low != 0 {
                *r ^= pivot;
            }
        }
    }
    rank
}

/// Row space kept in echelon form, indexed by each vector's lowest set bit.
///
/// Used by the exhaustive sweep to grow a basis block by block instead of
/// re-eliminating the whole stacked matrix for every candidate.
#[derive(Clone, Copy)]
pub struct EchelonBasis {
    by_pivot: [u64; 64],
    rank: usize,
}

impl Default for EchelonBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl EchelonBasis {
    pub const fn new() -> Self {
        Self {
            by_pivot: [0; 64],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Residue of `v` modulo the basis; zero iff `v` lies in the span.
    #[inline]
    pub fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let b = self.by_pivot[v.trailing_zeros() as usize];
            if b == 0 {
                break;
            }
            v ^= b;
        }
        v
    }

    /// Inserts `v`; returns whether the rank grew.
    #[inline]
    pub fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.by_pivot[r.trailing_zeros() as usize] = r;
        self.rank += 1;
        true
    }
}
