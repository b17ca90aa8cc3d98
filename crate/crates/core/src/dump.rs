//! In-memory form of the transformer score dumps.
//!
//! A dump is a header followed by one record per sentence. SAN dumps carry
//! the attention matrix summed over every layer and head; MLM dumps carry the
//! top-K raw logits predicted at each masked subword position. Byte-level
//! encoding lives in the `semglove` crate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpMode {
    San,
    Mlm,
}

impl DumpMode {
    pub fn code(self) -> u8 {
        match self {
            DumpMode::San => 1,
            DumpMode::Mlm => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(DumpMode::San),
            2 => Some(DumpMode::Mlm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DumpMode::San => "san",
            DumpMode::Mlm => "mlm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub mode: DumpMode,
    /// Predictions per position; 0 for SAN dumps.
    pub top_k: u32,
    pub n_layers: u32,
    pub n_heads: u32,
}

impl DumpHeader {
    pub const MAGIC: [u8; 4] = *b"SGDV";
    pub const VERSION: u32 = 1;

    pub fn san(n_layers: u32, n_heads: u32) -> Self {
        DumpHeader {
            mode: DumpMode::San,
            top_k: 0,
            n_layers,
            n_heads,
        }
    }

    pub fn mlm(top_k: u32, n_layers: u32, n_heads: u32) -> Self {
        DumpHeader {
            mode: DumpMode::Mlm,
            top_k,
            n_layers,
            n_heads,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(String::from(msg)));
        match self.mode {
            DumpMode::San if self.top_k != 0 => bad("SAN dump must have top_k = 0"),
            DumpMode::Mlm if self.top_k == 0 => bad("MLM dump must have top_k >= 1"),
            _ if self.n_layers == 0 || self.n_heads == 0 => bad("layer and head counts must be at least 1"),
            _ => Ok(()),
        }
    }

    /// Expected attention row sum: one probability distribution per head.
    pub fn heads_total(&self) -> f64 {
        f64::from(self.n_layers) * f64::from(self.n_heads)
    }

    pub fn expect_mode(&self, mode: DumpMode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: mode.name(),
                found: self.mode.name(),
            })
        }
    }
}

fn record_err(index: u64, reason: String) -> Error {
    Error::Record { index, reason }
}

fn check_words(index: u64, subword_counts: &[u32], n_bpe: usize) -> Result<()> {
    if subword_counts.is_empty() {
        return Err(record_err(index, "record has no words".into()));
    }
    if subword_counts.contains(&0) {
        return Err(record_err(index, "word with zero subwords".into()));
    }
    let total: u64 = subword_counts.iter().map(|&c| u64::from(c)).sum();
    if total != n_bpe as u64 {
        return Err(record_err(
            index,
            format!("subword counts sum to {total} but L = {n_bpe}"),
        ));
    }
    Ok(())
}

/// Subword position ranges of each word, in order.
pub fn word_spans(subword_counts: &[u32]) -> Vec<Range<usize>> {
    let mut start = 0usize;
    subword_counts
        .iter()
        .map(|&c| {
            let span = start..start + c as usize;
            start = span.end;
            span
        })
        .collect()
}

/// One sentence of a SAN dump.
#[derive(Debug, Clone, PartialEq)]
pub struct SanRecord {
    pub subword_counts: Vec<u32>,
    pub bpe_ids: Vec<u32>,
    /// `L × L`, row-major; `attn[k * L + l]` is the summed attention from
    /// subword `k` to subword `l`.
    pub attn: Vec<f32>,
}

impl SanRecord {
    pub fn n_bpe(&self) -> usize {
        self.bpe_ids.len()
    }

    pub fn n_words(&self) -> usize {
        self.subword_counts.len()
    }

    #[inline]
    pub fn at(&self, k: usize, l: usize) -> f64 {
        f64::from(self.attn[k * self.n_bpe() + l])
    }

    pub fn validate(&self, index: u64) -> Result<()> {
        let n = self.n_bpe();
        check_words(index, &self.subword_counts, n)?;
        if self.attn.len() != n * n {
            return Err(record_err(
                index,
                format!("attention has {} values, expected {}", self.attn.len(), n * n),
            ));
        }
        if let Some(pos) = self.attn.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(record_err(
                index,
                format!("attention value at {pos} is negative or not finite"),
            ));
        }
        Ok(())
    }

    /// Number of rows whose sum deviates from `expected` by more than
    /// `rel_tol` relative.
    pub fn row_sum_violations(&self, expected: f64, rel_tol: f64) -> usize {
        let n = self.n_bpe();
        (0..n)
            .filter(|&k| {
                let sum: f64 = (0..n).map(|l| self.at(k, l)).sum();
                (sum - expected).abs() > rel_tol * expected.abs()
            })
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub token: u32,
    /// Raw pre-softmax logit.
    pub logit: f32,
}

/// One sentence of an MLM dump.
#[derive(Debug, Clone, PartialEq)]
pub struct MlmRecord {
    pub subword_counts: Vec<u32>,
    pub bpe_ids: Vec<u32>,
    /// `L × top_k`; position `i` owns `predictions[i * top_k..(i + 1) * top_k]`.
    pub predictions: Vec<Prediction>,
}

impl MlmRecord {
    pub fn n_bpe(&self) -> usize {
        self.bpe_ids.len()
    }

    pub fn n_words(&self) -> usize {
        self.subword_counts.len()
    }

    pub fn position(&self, i: usize, top_k: usize) -> &[Prediction] {
        &self.predictions[i * top_k..(i + 1) * top_k]
    }

    /// Checks structure, finiteness and non-increasing logits.
    ///
    /// With `strict`, equal logits must also be ordered by ascending token id,
    /// which is what the writer requires.
    pub fn validate(&self, index: u64, top_k: usize, strict: bool) -> Result<()> {
        let n = self.n_bpe();
        check_words(index, &self.subword_counts, n)?;
        if self.predictions.len() != n * top_k {
            return Err(record_err(
                index,
                format!(
                    "{} predictions, expected {} positions x {} = {}",
                    self.predictions.len(),
                    n,
                    top_k,
                    n * top_k
                ),
            ));
        }
        for (i, preds) in self.predictions.chunks(top_k.max(1)).enumerate() {
            if preds.iter().any(|p| !p.logit.is_finite()) {
                return Err(record_err(index, format!("non-finite logit at position {i}")));
            }
            for pair in preds.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let ordered = a.logit > b.logit || (a.logit == b.logit && (!strict || a.token < b.token));
                if !ordered {
                    return Err(record_err(
                        index,
                        format!("logits at position {i} are not sorted in descending order"),
                    ));
                }
            }
        }
        Ok(())
    }
}
