//! Run configuration, binary snapshots, CSV export and initial-condition presets.

mod config;
mod csv;
mod initial;
mod snapshot;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{load_config, parse_config, DirectorPreset, InitialSpec, RunConfig, ThetaPreset};
pub use csv::{energy_csv_header, write_energy_csv, write_table_csv};
pub use initial::{gaussian_vortex_theta, harmonic_geodesic_d, initial_state, random_bandlimited_d, random_bandlimited_theta};
pub use snapshot::{
    load_state, read_snapshot, write_snapshot, Snapshot, SnapshotField, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};

/// Crate version embedded in every output file.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: key `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("snapshot checksum does not match its contents")]
    ChecksumMismatch,
    #[error("snapshot truncated: needed {needed} bytes, {available} available")]
    TruncatedPayload { needed: usize, available: usize },
    #[error("snapshot grid n = {found} does not match the run grid n = {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("malformed snapshot: {0}")]
    Format(String),
}

impl IoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }
}
