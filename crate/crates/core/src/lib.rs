//! Rank distributions of stacked persymmetric matrices over GF(2).
//!
//! A sequence α₁..α_{k+1} over GF(2) defines a 2×k block whose second row is
//! the first shifted by one. Stacking n such blocks gives a 2n×k matrix; this
//! crate counts those matrices by rank (Γ_i), exhaustively or by sampling,
//! evaluates the known closed forms for Γ_i, checks them against the moment
//! and character-sum identities, and re-derives the six-block forms for
//! ranks 8..=12 by exact linear algebra.
//!
//! Modules:
//! - [`gf2matrix`]: bit-packed matrices and rank.
//! - [`persym`]: block construction and the tuple/index bijection.
//! - [`enumeration`]: exact sharded sweeps and seeded sampling.
//! - [`cache`]: JSON records and the on-disk distribution cache.
//! - [`exppoly`], [`closedform`]: polynomials in 2^k and the closed forms.
//! - [`derivation`]: solving for the high-rank coefficients.
//! - [`polysys`]: exponential sums and the bilinear polynomial system.

pub mod cache;
pub mod closedform;
pub mod derivation;
pub mod enumeration;
pub mod error;
pub mod exppoly;
pub mod gf2matrix;
pub mod persym;
pub mod polysys;

pub use closedform::{ClosedFormFamily, FamilyId, RangePolicy};
pub use enumeration::{Method, RankDistribution, SampleMeta, SweepLimits};
pub use error::{Error, Result};
pub use exppoly::ExpPoly;
pub use gf2matrix::BitMatrix;
pub use persym::SequenceTuple;
pub use polysys::Poly2;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
