//! `word count` per line, in id order.

use std::io::{BufRead, Write};
use std::path::Path;

use semglove_core::Vocabulary;

use super::{create, open};
use crate::error::{Error, Result};

pub fn write_vocab<W: Write>(vocab: &Vocabulary, mut out: W) -> std::io::Result<()> {
    for (word, count) in vocab.iter() {
        writeln!(out, "{word} {count}")?;
    }
    out.flush()
}

pub fn save_vocab(vocab: &Vocabulary, path: &Path) -> Result<()> {
    write_vocab(vocab, create(path)?).map_err(|e| Error::io(path, e))
}

/// `path` only labels errors.
pub fn read_vocab<R: BufRead>(input: R, path: &Path) -> Result<Vocabulary> {
    let mut entries = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 1;
        let (word, count) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(path, lineno, "expected 'word count'"))?;
        if word.is_empty() {
            return Err(Error::parse(path, lineno, "empty word"));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid count '{count}'")))?;
        entries.push((word.to_string(), count));
    }
    let n = entries.len();
    let vocab = Vocabulary::from_entries(entries);
    if vocab.len() != n {
        return Err(Error::format(path, "duplicate word in vocabulary"));
    }
    Ok(vocab)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    read_vocab(open(path)?, path)
}
