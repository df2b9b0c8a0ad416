//! Benchmark-only package; see `benches/discrimination.rs`.
