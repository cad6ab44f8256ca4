//! Scenario-file parsing and result export for the `coverage` binary,
//! exposed as a library so the formats can be tested directly.

pub mod export;
pub mod scenario_file;
