//! Criterion benchmarks for the counting, primitivity, walk and quotient kernels.
//! The benches live in `benches/kernels.rs`.
