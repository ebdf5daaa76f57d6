//! Criterion benchmarks for the booksuccess library; see `benches/`.
