//! Experiment orchestration: configuration, the benchmark runs, error
//! tables and file output.

pub mod config;
pub mod output;
pub mod peanut;
pub mod poisson;
pub mod problems;
pub mod report;
pub mod stefan;
