//! Criterion benchmarks for `crossint-core`; see `benches/`.
