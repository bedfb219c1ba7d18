//! Benchmarks for the collapse engine live under `benches/`.
