//! Criterion benchmarks for subfactor-core live under `benches/`.
