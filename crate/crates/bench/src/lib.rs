//! Criterion benchmarks for the dense kernels live under `benches/`.
