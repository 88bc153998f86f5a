//! Scenario files, batch benchmarking, and reporting around `mmplan-core`.
//!
//! The binary in `main.rs` is a thin wrapper over [`app::run`]; everything
//! else lives here so integration tests can drive the same code paths.

pub mod app;
pub mod batch;
pub mod generate;
pub mod report;
pub mod scenario;
