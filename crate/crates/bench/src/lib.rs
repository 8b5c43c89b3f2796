//! Criterion benchmarks for the hot paths of `meshqa-core`; run with `cargo bench -p meshqa-bench`.
