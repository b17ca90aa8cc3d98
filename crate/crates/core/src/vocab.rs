//! Frequency-filtered vocabulary and whitespace tokenization.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

pub type WordId = u32;

/// Word ↔ id table with corpus frequencies.
///
/// Ids are assigned in descending count order, ties broken by first
/// occurrence in the corpus.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, WordId>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.counts == other.counts
    }
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, count)` pairs taken in id order.
    ///
    /// Duplicate words keep the first id.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for (word, count) in entries {
            let word = word.into();
            if vocab.ids.contains_key(&word) {
                continue;
            }
            vocab.ids.insert(word.clone(), vocab.words.len() as WordId);
            vocab.words.push(word);
            vocab.counts.push(count);
        }
        vocab
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    #[inline]
    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    #[inline]
    pub fn count(&self, id: WordId) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `(word, count)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words.iter().map(String::as_str).zip(self.counts.iter().copied())
    }

    /// Maps each whitespace-separated token of `line` to its id.
    ///
    /// Out-of-vocabulary tokens become `None` and keep their position.
    pub fn encode_line(&self, line: &str) -> Vec<Option<WordId>> {
        line.split_whitespace().map(|t| self.id(t)).collect()
    }

    pub fn tokenize(&self, line: &str) -> Sentence {
        let tokens: Vec<String> = line.split_whitespace().map(ToString::to_string).collect();
        let ids = tokens.iter().map(|t| self.id(t)).collect();
        Sentence { tokens, ids }
    }
}

/// A tokenized line. `ids[k]` is `None` for out-of-vocabulary `tokens[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub ids: Vec<Option<WordId>>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Streaming word counter.
///
/// Counters over consecutive corpus shards can be merged in corpus order and
/// produce exactly the counts and first-occurrence order of a single pass.
#[derive(Debug, Clone, Default)]
pub struct WordCounter {
    order: Vec<String>,
    counts: Vec<u64>,
    slots: HashMap<String, usize>,
    tokens: u64,
}

impl WordCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_token(&mut self, token: &str) {
        self.tokens += 1;
        if let Some(&slot) = self.slots.get(token) {
            self.counts[slot] += 1;
        } else {
            self.slots.insert(token.to_string(), self.order.len());
            self.order.push(token.to_string());
            self.counts.push(1);
        }
    }

    pub fn add_line(&mut self, line: &str) {
        for token in line.split_whitespace() {
            self.add_token(token);
        }
    }

    /// Folds a counter for the shard that follows this one in the corpus.
    pub fn merge(&mut self, later: WordCounter) {
        self.tokens += later.tokens;
        for (word, count) in later.order.into_iter().zip(later.counts) {
            if let Some(&slot) = self.slots.get(&word) {
                self.counts[slot] += count;
            } else {
                self.slots.insert(word.clone(), self.order.len());
                self.order.push(word);
                self.counts.push(count);
            }
        }
    }

    /// Total number of tokens seen, including those later filtered out.
    pub fn total_tokens(&self) -> u64 {
        self.tokens
    }

    pub fn finish(self, min_count: u64) -> Vocabulary {
        let mut kept: Vec<(usize, String, u64)> = self
            .order
            .into_iter()
            .zip(self.counts)
            .enumerate()
            .filter(|(_, (_, c))| *c >= min_count)
            .map(|(first, (w, c))| (first, w, c))
            .collect();
        // first-occurrence index is unique, so the order is total
        kept.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
        Vocabulary::from_entries(kept.into_iter().map(|(_, w, c)| (w, c)))
    }
}

/// Counts whitespace tokens over `lines` and keeps words seen at least
/// `min_count` times.
pub fn build_vocab<'a, I>(lines: I, min_count: u64) -> Vocabulary
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counter = WordCounter::new();
    for line in lines {
        counter.add_line(line);
    }
    counter.finish(min_count.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn counts_and_orders_by_frequency() {
        let v = build_vocab("a b a\nb a c".lines(), 2);
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.count(0), Some(3));
        assert_eq!(v.count(1), Some(2));
        assert_eq!(v.id("c"), None);
    }

    #[test]
    fn single_token_corpus() {
        let v = build_vocab(["x"], 1);
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![("x", 1)]);
        assert!(build_vocab(["x"], 2).is_empty());
    }

    #[test]
    fn empty_corpus_gives_empty_vocab() {
        assert!(build_vocab(core::iter::empty(), 5).is_empty());
    }

    #[test]
    fn ties_follow_first_occurrence() {
        let v = build_vocab(["c b a", "a b c"], 1);
        assert_eq!(v.words(), &["c", "b", "a"]);
    }

    #[test]
    fn tokenize_keeps_oov_positions() {
        let v = Vocabulary::from_entries([("a", 3), ("b", 2)]);
        let s = v.tokenize("a b q");
        assert_eq!(s.ids, vec![Some(0), Some(1), None]);
        assert_eq!(s.tokens.len(), 3);
        assert!(v.tokenize("").is_empty());
        let v = Vocabulary::from_entries([("a", 3)]);
        assert_eq!(v.tokenize("a a a").ids, vec![Some(0); 3]);
    }

    #[test]
    fn sharded_counting_matches_single_pass() {
        let lines = ["the cat sat", "on the mat", "the dog", "a cat a dog"];
        let single = build_vocab(lines, 1);
        let mut left = WordCounter::new();
        lines[..2].iter().for_each(|l| left.add_line(l));
        let mut right = WordCounter::new();
        lines[2..].iter().for_each(|l| right.add_line(l));
        left.merge(right);
        assert_eq!(left.total_tokens(), 12);
        assert_eq!(left.finish(1), single);
    }
}
