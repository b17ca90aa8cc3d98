//! File formats, parallel co-occurrence builders, the hogwild trainer and
//! the command line for semantic GloVe embeddings.
//!
//! The numerical kernels live in [`semglove_core`]; this crate moves data
//! between them and the filesystem.

pub mod builders;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod formats;
pub mod hogwild;

pub use error::{Error, Result};
pub use semglove_core as core;
