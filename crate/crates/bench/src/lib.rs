//! Criterion benchmarks for the rank kernel and the exhaustive sweep; see `benches/`.
