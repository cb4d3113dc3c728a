//! Batch experiment runner: parses the experiment flags, evaluates the
//! selected pipelines (Beer's law, both closed-form conventions, Monte Carlo
//! ensemble, Euler cross-check) and writes the curve data as CSV.

pub mod config;
pub mod runner;

pub use config::{parse_args, ExperimentConfig, Mode, UsageError};
pub use runner::{adjudicate, evaluate, format_value, run, Row, RunError, RunOutcome, Verdict, CSV_HEADER};
