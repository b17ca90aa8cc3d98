//! Co-occurrence counts distilled from summed self-attention.
//!
//! Subword attention is averaged up to word level, each target keeps its
//! most attended in-window context words, and those are weighted relative to
//! the strongest one.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::cooc::CoocMatrix;
use crate::distance::Distance;
use crate::dump::{word_spans, SanRecord};
use crate::error::{Error, Result};
use crate::vocab::WordId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SanConfig {
    /// Words on each side of the target eligible as context.
    pub window: usize,
    /// How many candidates survive selection.
    pub select_top: usize,
    pub distance: Distance,
}

impl Default for SanConfig {
    fn default() -> Self {
        SanConfig {
            window: 5,
            select_top: 5,
            distance: Distance::Division,
        }
    }
}

impl SanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.select_top == 0 || self.select_top > 2 * self.window {
            return Err(Error::Config(format!(
                "select_top must be in 1..={}, got {}",
                2 * self.window,
                self.select_top
            )));
        }
        Ok(())
    }
}

/// Word-level attention of one sentence, restricted to the window.
///
/// `rows[i]` lists `(j, AW_ij)` for every word position `j ≠ i` with
/// `|i - j| ≤ window`, in ascending `j`.
pub fn bpe_to_word_attention(rec: &SanRecord, window: usize) -> Vec<Vec<(usize, f64)>> {
    let spans = word_spans(&rec.subword_counts);
    let n_words = spans.len();
    let mut rows = Vec::with_capacity(n_words);
    for (i, src) in spans.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(n_words - 1);
        let mut row = Vec::with_capacity(hi - lo);
        for (j, dst) in spans.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            let mut sum = 0.0;
            for k in src.clone() {
                for l in dst.clone() {
                    sum += rec.at(k, l);
                }
            }
            row.push((j, sum / (src.len() * dst.len()) as f64));
        }
        rows.push(row);
    }
    rows
}

/// A context word competing for selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub word: WordId,
    /// Positional distance to the target, used only to break ties.
    pub offset: usize,
    pub score: f64,
}

/// Selected context words of one target with their co-occurrence weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordAttnRow {
    pub target: WordId,
    pub context: Vec<(WordId, f64)>,
}

fn by_rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.offset.cmp(&b.offset))
        .then(a.word.cmp(&b.word))
}

/// Keeps the `select_top` highest scoring candidates and weights them.
///
/// Candidates with a non-positive or non-finite score are discarded first.
pub fn select_and_weight(target: WordId, mut candidates: Vec<Candidate>, cfg: &SanConfig) -> WordAttnRow {
    candidates.retain(|c| c.score > 0.0 && c.score.is_finite());
    candidates.sort_by(by_rank);
    candidates.truncate(cfg.select_top);
    let scores: Vec<f64> = candidates.iter().map(|c| c.score).collect();
    let weights = cfg.distance.weights(&scores);
    WordAttnRow {
        target,
        context: candidates.iter().zip(weights).map(|(c, w)| (c.word, w)).collect(),
    }
}

/// Selected rows for one record aligned with the word ids of its sentence.
///
/// `ids` must hold at least as many words as the record; extra trailing words
/// (a sentence truncated by the extractor) are ignored.
pub fn record_rows(rec: &SanRecord, ids: &[Option<WordId>], cfg: &SanConfig) -> Result<Vec<WordAttnRow>> {
    let n_words = rec.n_words();
    if ids.len() < n_words {
        return Err(Error::Config(format!(
            "record covers {} words but its sentence has {}",
            n_words,
            ids.len()
        )));
    }
    let ids = &ids[..n_words];
    let attention = bpe_to_word_attention(rec, cfg.window);
    let mut out = Vec::new();
    for (i, row) in attention.into_iter().enumerate() {
        let Some(target) = ids[i] else { continue };
        // out-of-vocabulary and same-word candidates go before selection
        let candidates: Vec<Candidate> = row
            .into_iter()
            .filter_map(|(j, score)| match ids[j] {
                Some(word) if word != target => Some(Candidate {
                    word,
                    offset: i.abs_diff(j),
                    score,
                }),
                _ => None,
            })
            .collect();
        let selected = select_and_weight(target, candidates, cfg);
        if !selected.context.is_empty() {
            out.push(selected);
        }
    }
    Ok(out)
}

/// Adds the contribution of one sentence to `m`.
pub fn accumulate_record(m: &mut CoocMatrix, rec: &SanRecord, ids: &[Option<WordId>], cfg: &SanConfig) -> Result<()> {
    for row in record_rows(rec, ids, cfg)? {
        for (context, w) in row.context {
            m.accumulate(row.target, context, w)?;
        }
    }
    Ok(())
}

/// Builds the attention-distilled matrix from `(record, sentence ids)` pairs.
pub fn build_san_cooc<'a, I>(records: I, vocab_size: usize, cfg: &SanConfig) -> Result<CoocMatrix>
where
    I: IntoIterator<Item = (&'a SanRecord, &'a [Option<WordId>])>,
{
    cfg.validate()?;
    let mut m = CoocMatrix::new(vocab_size);
    for (rec, ids) in records {
        accumulate_record(&mut m, rec, ids, cfg)?;
    }
    Ok(m)
}
