//! Command-line front end for the dephasing-control numerics: scenario
//! configuration, sweep orchestration, and CSV/JSON/SVG report emission.

pub mod commands;
pub mod config;
pub mod plot;
pub mod report;
pub mod run;

/// Process exit codes of the `odcm` binary.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG_ERROR: i32 = 2;
    pub const ALL_POINTS_FAILED: i32 = 3;
    pub const IO_ERROR: i32 = 4;
}
