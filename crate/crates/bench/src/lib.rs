//! Criterion benchmarks for `urllc-core`; see `benches/`.
