//! Benchmark-only crate; see `benches/step.rs`.
