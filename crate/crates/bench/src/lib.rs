//! Std companion to `mlindex-core`: text formats, benchmark configuration,
//! the experiment harness and CSV reporting used by the `mlindex` CLI.

pub mod config;
pub mod data;
pub mod formats;
pub mod harness;
pub mod report;

pub use config::{BenchConfig, ConfigError, Scale, Scenario};
pub use harness::{
    run_addition_bench, run_benchmark, run_retrieval_bench, BenchError, BenchKind, BenchRow, Dataset, Metric,
};
pub use report::{parse_csv, render_report, to_csv, write_csv};
