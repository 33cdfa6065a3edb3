//! Criterion benchmarks for qsum-core; see `benches/`.
