//! Run configuration, binary snapshots and CSV output.

mod config;
mod csv;
mod snapshot;

pub use config::RunConfig;
pub use csv::{csv_string, metadata_line, write_csv, write_csv_body};
pub use snapshot::{Snapshot, SnapshotHeader, FORMAT_VERSION, MAGIC};
