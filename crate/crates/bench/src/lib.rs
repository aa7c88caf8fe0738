//! Criterion benchmarks for `wcauth-core`; see `benches/`.
