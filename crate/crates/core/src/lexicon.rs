//! Word → subword id sequences, shared with the score extractor.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Default)]
pub struct SubwordLexicon {
    words: Vec<String>,
    pieces: Vec<Vec<u32>>,
    index: HashMap<String, usize>,
}

impl PartialEq for SubwordLexicon {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.pieces == other.pieces
    }
}

impl SubwordLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, ids: Vec<u32>) -> Result<()> {
        let word = word.into();
        if ids.is_empty() {
            return Err(Error::Lexicon(format!("empty subword list for '{word}'")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::Lexicon(format!("duplicate word '{word}'")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.pieces.push(ids);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[u32]> {
        self.index.get(word).map(|&k| self.pieces[k].as_slice())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u32])> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.pieces.iter().map(Vec::as_slice))
    }

    /// Subword sequences for each vocabulary word, in id order.
    pub fn for_vocab<'a>(&'a self, vocab: &Vocabulary) -> Result<Vec<&'a [u32]>> {
        vocab
            .words()
            .iter()
            .map(|w| self.get(w).ok_or_else(|| Error::MissingFromLexicon(w.clone())))
            .collect()
    }
}
