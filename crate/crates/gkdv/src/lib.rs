//! File formats, scenario configuration, reports and the command line for
//! the `gkdv-core` numerics.
//!
//! The binary is a thin wrapper around [`cli::run`]. The acceptance suite in
//! [`suite`] is shared by `gkdv verify` and the `acceptance` integration test.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod suite;
pub mod tables;
