//! Command-line harness for the SpGEMM kernels: single runs, parameter
//! sweeps and per-matrix comparison tables, all in cost-model counts.
//!
//! "Ratios" in compare output are `metric(algo) / metric(SPA)` for one
//! [`spgemm_core::CostReport`] counter. They are not wall-clock speed-ups.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod stats;

pub use cli::{execute, Cli};
pub use commands::{cmd_compare, cmd_run, cmd_sweep, Axis, CompareTable, SweepPoint};
pub use config::{Algo, AlgoSpec, Format, MatrixSource, RunConfig};
pub use error::{BenchError, EXIT_VERIFICATION_FAILED};
pub use report::{RunReport, Verdict};
