//! Co-occurrence counts distilled from masked language model predictions.
//!
//! Counts are first gathered between subword tokens (the token at a masked
//! position and the tokens predicted for it), then averaged over the subword
//! pairs of every word pair.

use alloc::format;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::cooc::CoocMatrix;
use crate::distance::Distance;
use crate::dump::MlmRecord;
use crate::error::{Error, Result};
use crate::lexicon::SubwordLexicon;
use crate::vocab::{Vocabulary, WordId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlmConfig {
    /// Predictions considered per position, before self and non-positive
    /// entries are dropped.
    pub top_tokens: usize,
    pub distance: Distance,
}

impl Default for MlmConfig {
    fn default() -> Self {
        MlmConfig {
            top_tokens: 10,
            distance: Distance::Division,
        }
    }
}

impl MlmConfig {
    /// `dump_top_k` is the number of predictions stored per position.
    pub fn validate(&self, dump_top_k: usize) -> Result<()> {
        if self.top_tokens == 0 || self.top_tokens > dump_top_k {
            return Err(Error::Config(format!(
                "top_tokens must be in 1..={dump_top_k}, got {}",
                self.top_tokens
            )));
        }
        Ok(())
    }
}

/// Directed subword-to-subword counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BpeCoocMatrix {
    entries: HashMap<(u32, u32), f64>,
}

impl BpeCoocMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, source: u32, context: u32) -> Option<f64> {
        self.entries.get(&(source, context)).copied()
    }

    pub fn accumulate(&mut self, source: u32, context: u32, w: f64) -> Result<()> {
        if source == context {
            return Err(Error::SelfPair(source));
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonPositiveWeight(w));
        }
        *self.entries.entry((source, context)).or_insert(0.0) += w;
        Ok(())
    }

    pub fn merge(&mut self, other: BpeCoocMatrix) {
        for (k, v) in other.entries {
            *self.entries.entry(k).or_insert(0.0) += v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.entries.iter().map(|(&(s, t), &v)| (s, t, v))
    }
}

/// Retained `(context token, weight)` pairs for one masked position.
///
/// Takes the first `cfg.top_tokens` predictions, drops the source token
/// itself and every non-positive logit, then weights the rest against the
/// largest retained logit.
pub fn position_weights(source: u32, predictions: &[crate::dump::Prediction], cfg: &MlmConfig) -> Vec<(u32, f64)> {
    let kept: Vec<(u32, f64)> = predictions
        .iter()
        .take(cfg.top_tokens)
        .filter(|p| p.token != source && p.logit > 0.0)
        .map(|p| (p.token, f64::from(p.logit)))
        .collect();
    let logits: Vec<f64> = kept.iter().map(|&(_, g)| g).collect();
    kept.iter()
        .zip(cfg.distance.weights(&logits))
        .map(|(&(t, _), w)| (t, w))
        .collect()
}

pub fn accumulate_bpe_cooc(rec: &MlmRecord, top_k: usize, cfg: &MlmConfig, acc: &mut BpeCoocMatrix) -> Result<()> {
    for (i, &source) in rec.bpe_ids.iter().enumerate() {
        for (context, w) in position_weights(source, rec.position(i, top_k), cfg) {
            acc.accumulate(source, context, w)?;
        }
    }
    Ok(())
}

/// Averages subword counts up to word pairs.
///
/// Built once from a finished subword matrix; rows for different target words
/// are independent.
#[derive(Debug)]
pub struct WordAverager<'a> {
    pieces: Vec<&'a [u32]>,
    rows: HashMap<u32, Vec<(u32, f64)>>,
    // context subword → (word, occurrences of the subword in that word)
    containing: HashMap<u32, Vec<(WordId, u32)>>,
}

impl<'a> WordAverager<'a> {
    pub fn new(m: &BpeCoocMatrix, vocab: &Vocabulary, lex: &'a SubwordLexicon) -> Result<Self> {
        let pieces = lex.for_vocab(vocab)?;
        let mut rows: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        for (s, t, v) in m.iter() {
            rows.entry(s).or_default().push((t, v));
        }
        for row in rows.values_mut() {
            row.sort_unstable_by_key(|&(t, _)| t);
        }
        let mut containing: HashMap<u32, Vec<(WordId, u32)>> = HashMap::new();
        for (word, ids) in pieces.iter().enumerate() {
            let mut seen: Vec<(u32, u32)> = Vec::new();
            for &t in ids.iter() {
                match seen.iter_mut().find(|(id, _)| *id == t) {
                    Some((_, c)) => *c += 1,
                    None => seen.push((t, 1)),
                }
            }
            for (t, c) in seen {
                containing.entry(t).or_default().push((word as WordId, c));
            }
        }
        Ok(WordAverager {
            pieces,
            rows,
            containing,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.pieces.len()
    }

    /// `(j, X_ij)` for every word `j ≠ i` sharing at least one nonzero
    /// subword pair with word `i`, sorted by `j`.
    pub fn word_row(&self, i: WordId) -> Vec<(WordId, f64)> {
        let sources = self.pieces[i as usize];
        let mut acc: HashMap<WordId, f64> = HashMap::new();
        for s in sources {
            let Some(row) = self.rows.get(s) else { continue };
            for &(t, v) in row {
                let Some(words) = self.containing.get(&t) else { continue };
                for &(j, c) in words {
                    if j != i {
                        *acc.entry(j).or_insert(0.0) += v * f64::from(c);
                    }
                }
            }
        }
        let m = sources.len() as f64;
        let mut out: Vec<(WordId, f64)> = acc
            .into_iter()
            .map(|(j, sum)| (j, sum / (m * self.pieces[j as usize].len() as f64)))
            .collect();
        out.sort_unstable_by_key(|&(j, _)| j);
        out
    }
}

pub fn bpe_to_word_cooc(m: &BpeCoocMatrix, vocab: &Vocabulary, lex: &SubwordLexicon) -> Result<CoocMatrix> {
    let averager = WordAverager::new(m, vocab, lex)?;
    let mut out = CoocMatrix::new(vocab.len());
    for i in 0..vocab.len() as WordId {
        for (j, x) in averager.word_row(i) {
            out.accumulate(i, j, x)?;
        }
    }
    Ok(out)
}

/// Subword accumulation over every record, then word-level averaging.
pub fn build_mlm_cooc<'r, I>(
    records: I,
    top_k: usize,
    vocab: &Vocabulary,
    lex: &SubwordLexicon,
    cfg: &MlmConfig,
) -> Result<CoocMatrix>
where
    I: IntoIterator<Item = &'r MlmRecord>,
{
    cfg.validate(top_k)?;
    let mut acc = BpeCoocMatrix::new();
    for rec in records {
        accumulate_bpe_cooc(rec, top_k, cfg, &mut acc)?;
    }
    bpe_to_word_cooc(&acc, vocab, lex)
}
