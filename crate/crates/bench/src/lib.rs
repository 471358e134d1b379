//! Benchmark-only crate: the suites live in `benches/planners.rs`.
