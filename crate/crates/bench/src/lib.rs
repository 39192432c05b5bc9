//! Benchmarks for the core crate live under `benches/`.
