//! Criterion benchmarks for the casiga solver live in `benches/`.
