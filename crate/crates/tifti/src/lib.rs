//! File formats, configuration and the command-line front end for
//! `tifti-core`.

pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod error;
pub mod model_io;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use tifti_core as core;
