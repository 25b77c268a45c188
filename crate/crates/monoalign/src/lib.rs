//! File formats, embedding providers, configuration and the command-line
//! pipeline around `monoalign-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod provider;
pub mod synth;

pub use error::{Error, Result};
