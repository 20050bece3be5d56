//! File formats, persistence, experiment sweeps and the command-line
//! interface on top of the `lscd-core` algorithms.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod hogwild;
pub mod kv;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod spaces_io;

pub use error::{Error, Result};
