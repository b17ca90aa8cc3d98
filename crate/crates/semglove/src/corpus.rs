//! Corpus ingestion: one pre-tokenized sentence per line.

use std::path::Path;

use rayon::prelude::*;
use semglove_core::vocab::{Vocabulary, WordCounter, WordId};

use crate::error::{Error, Result};

/// Lines per parallel shard.
const SHARD_LINES: usize = 4096;

pub fn read_corpus(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines: the sentences that dump records are aligned with.
pub fn sentences(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.trim().is_empty())
}

/// Counts words over shards in parallel and merges them in corpus order, so
/// the result equals a single sequential pass.
pub fn build_vocab(text: &str, min_count: u64) -> Vocabulary {
    let lines: Vec<&str> = text.lines().collect();
    let shards: Vec<WordCounter> = lines
        .par_chunks(SHARD_LINES)
        .map(|chunk| {
            let mut c = WordCounter::new();
            chunk.iter().for_each(|l| c.add_line(l));
            c
        })
        .collect();
    let mut total = WordCounter::new();
    for shard in shards {
        total.merge(shard);
    }
    total.finish(min_count.max(1))
}

pub fn encode_sentences(text: &str, vocab: &Vocabulary) -> Vec<Vec<Option<WordId>>> {
    let lines: Vec<&str> = sentences(text).collect();
    lines.par_iter().map(|l| vocab.encode_line(l)).collect()
}
