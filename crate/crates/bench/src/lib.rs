//! Benchmarks for `affine-kms`; see `benches/`.
