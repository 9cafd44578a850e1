//! Benchmark host crate. The measurements live in `benches/hotpaths.rs`;
//! run them with `cargo bench -p scaledrive-bench`.
