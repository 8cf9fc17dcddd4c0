//! Image and measurement I/O, experiment configuration and the benchmark
//! grid runner behind the `fpr` binary.

pub mod config;
pub mod error;
pub mod experiment;
pub mod measurements;
pub mod pgm;
pub mod seeds;

pub use config::{BaselineSettings, ConfigFile, ExperimentSpec};
pub use error::{Error, Result};
pub use experiment::{emit_plotdata, run_bench, run_sweep, BenchReport, ImageSource, Method, ResultRow};
