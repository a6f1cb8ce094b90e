//! Command-line driver for the LPP experiments: config handling, the
//! deterministic chunked runner, raw/report/manifest persistence and the
//! oracle self-test.

pub mod app;
pub mod config;
pub mod manifest;
pub mod raw;
pub mod runner;
pub mod selftest;

pub use app::{main_with_args, recompute_report, run_experiment, RunOutcome, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
