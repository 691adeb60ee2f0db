//! Experiment orchestration for `sqent-core`: configuration, the reference
//! table, the quench run with its CSV/JSON artifacts, randomized property
//! suites and state-file bounds.

pub mod bounds;
pub mod checks;
pub mod config;
pub mod oracle;
pub mod properties;
pub mod quench;
pub mod series;
pub mod statefile;
pub mod table1;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const RUNTIME_ERROR: i32 = 1;
    pub const PROPERTY_FAILURE: i32 = 2;
}
