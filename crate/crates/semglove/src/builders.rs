//! Parallel drivers for the three co-occurrence builders.
//!
//! Work is split into shards that accumulate privately and are merged at the
//! end. Window counts merge exactly; attention and MLM counts merge up to f64
//! reassociation.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use semglove_core::dump::DumpMode;
use semglove_core::mlm::{self, BpeCoocMatrix, MlmConfig, WordAverager};
use semglove_core::san::{self, SanConfig};
use semglove_core::vocab::WordId;
use semglove_core::window::{WindowConfig, WindowCounts};
use semglove_core::{CoocMatrix, SanRecord, SubwordLexicon, Vocabulary};

use crate::error::{Error, Result};
use crate::formats::sgdv::{DumpReader, DumpRecord};

const SHARD_SENTENCES: usize = 2048;
const RECORD_BATCH: usize = 512;

pub fn window_cooc(sentences: &[Vec<Option<WordId>>], vocab_size: usize, cfg: &WindowConfig) -> Result<CoocMatrix> {
    // fail fast on a bad config before spawning work
    WindowCounts::new(vocab_size, *cfg)?;
    let counts = sentences
        .par_chunks(SHARD_SENTENCES)
        .map(|chunk| {
            let mut c = WindowCounts::new(vocab_size, *cfg)?;
            for ids in chunk {
                c.add_sentence(ids)?;
            }
            Ok(c)
        })
        .try_reduce_with(|mut a, b| {
            a.merge(b);
            Ok::<_, semglove_core::Error>(a)
        });
    match counts {
        Some(c) => Ok(c?.into_matrix()?),
        None => Ok(CoocMatrix::new(vocab_size)),
    }
}

fn merge_all(parts: Vec<CoocMatrix>, vocab_size: usize) -> CoocMatrix {
    parts.into_iter().fold(CoocMatrix::new(vocab_size), |mut acc, m| {
        acc.merge(m);
        acc
    })
}

/// Attention-distilled counts. Record `r` of the dump is aligned with the
/// `r`-th sentence.
pub fn san_cooc(
    dump: &Path,
    sentences: &[Vec<Option<WordId>>],
    vocab_size: usize,
    cfg: &SanConfig,
) -> Result<CoocMatrix> {
    cfg.validate()?;
    let reader = DumpReader::open(dump)?;
    reader.header().expect_mode(DumpMode::San)?;
    let process = |batch: &[(u64, SanRecord)]| -> Result<CoocMatrix> {
        let parts = batch
            .par_chunks(RECORD_BATCH / 8)
            .map(|chunk| {
                let mut m = CoocMatrix::new(vocab_size);
                for (index, rec) in chunk {
                    let ids = sentences.get(*index as usize).ok_or_else(|| {
                        Error::format(dump, format!("record {index} has no matching corpus sentence"))
                    })?;
                    san::accumulate_record(&mut m, rec, ids, cfg).map_err(|e| match e {
                        semglove_core::Error::Config(msg) => Error::format(dump, format!("record {index}: {msg}")),
                        other => other.into(),
                    })?;
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(merge_all(parts, vocab_size))
    };
    let mut total = CoocMatrix::new(vocab_size);
    let mut batch: Vec<(u64, SanRecord)> = Vec::with_capacity(RECORD_BATCH);
    for (index, rec) in reader.enumerate() {
        match rec? {
            DumpRecord::San(r) => batch.push((index as u64, r)),
            DumpRecord::Mlm(_) => unreachable!("mode checked against the header"),
        }
        if batch.len() == RECORD_BATCH {
            total.merge(process(&batch)?);
            batch.clear();
        }
    }
    total.merge(process(&batch)?);
    Ok(total)
}

/// Subword counts of one MLM dump.
pub fn mlm_bpe_counts(dump: &Path, cfg: &MlmConfig) -> Result<BpeCoocMatrix> {
    let reader = DumpReader::open(dump)?;
    let header = *reader.header();
    header.expect_mode(DumpMode::Mlm)?;
    let top_k = header.top_k as usize;
    cfg.validate(top_k)?;
    let mut acc = BpeCoocMatrix::new();
    for rec in reader {
        if let DumpRecord::Mlm(r) = rec? {
            mlm::accumulate_bpe_cooc(&r, top_k, cfg, &mut acc)?;
        }
    }
    Ok(acc)
}

/// MLM-distilled counts over one or more dumps, read in parallel.
pub fn mlm_cooc(dumps: &[PathBuf], vocab: &Vocabulary, lex: &SubwordLexicon, cfg: &MlmConfig) -> Result<CoocMatrix> {
    let parts = dumps
        .par_iter()
        .map(|d| mlm_bpe_counts(d, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = BpeCoocMatrix::new();
    for p in parts {
        counts.merge(p);
    }
    word_cooc(&counts, vocab, lex)
}

/// Word-level averaging, parallel over target words.
pub fn word_cooc(counts: &BpeCoocMatrix, vocab: &Vocabulary, lex: &SubwordLexicon) -> Result<CoocMatrix> {
    let averager = WordAverager::new(counts, vocab, lex)?;
    let rows: Vec<Vec<(WordId, f64)>> = (0..vocab.len() as WordId)
        .into_par_iter()
        .map(|i| averager.word_row(i))
        .collect();
    let mut m = CoocMatrix::new(vocab.len());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, x) in row {
            m.accumulate(i as WordId, j, x)?;
        }
    }
    Ok(m)
}
