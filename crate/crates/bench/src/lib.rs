//! Criterion benchmarks for the review pipeline; see `benches/`.
