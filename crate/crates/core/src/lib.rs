//! Core kernels for building GloVe embeddings from three kinds of
//! co-occurrence statistics: positional window counts, counts distilled from
//! summed transformer self-attention, and counts distilled from masked
//! language model logits.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, threads or the command line lives in the `semglove` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod cooc;
pub mod distance;
pub mod dump;
pub mod error;
pub mod eval;
pub mod glove;
pub mod lexicon;
pub mod mlm;
pub mod san;
pub mod vocab;
pub mod window;

/// Crate version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use cooc::{CoocMatrix, CoocRecord};
pub use distance::Distance;
pub use dump::{DumpHeader, DumpMode, MlmRecord, SanRecord};
pub use error::{Error, Result};
pub use lexicon::SubwordLexicon;
pub use vocab::{Sentence, Vocabulary, WordId};
