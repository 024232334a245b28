//! Criterion benchmarks for lensgeo live under `benches/`.
