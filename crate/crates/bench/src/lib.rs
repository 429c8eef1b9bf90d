//! Criterion benchmarks for the spinnet kernels; see `benches/`.
