//! Benchmark harness for adiabatic echo verification: run configs, grid
//! execution, record I/O, slope fits and plot scripts.

pub mod config;
pub mod error;
pub mod fit;
pub mod harness;
pub mod plot;
pub mod record;

pub use error::{BenchError, Result};
