//! Criterion benchmarks for lyaplab live in `benches/`.
