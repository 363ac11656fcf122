//! Command-line front end for the deployment planner: scenario loading,
//! population ingestion, stage orchestration, and file export. The binary
//! in `main.rs` is a thin argument-parsing shell over [`pipeline`].

pub mod error;
pub mod export;
pub mod geojson;
pub mod ingest;
pub mod pipeline;
pub mod scenario;
