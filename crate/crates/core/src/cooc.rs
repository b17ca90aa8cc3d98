//! Sparse co-occurrence accumulator shared by every builder and the trainer.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::vocab::WordId;

/// One serialized entry: 16 bytes, `i: u32`, `j: u32`, `x: f64`, all
/// little-endian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoocRecord {
    pub i: WordId,
    pub j: WordId,
    pub x: f64,
}

impl CoocRecord {
    pub const SIZE: usize = 16;

    pub fn to_bytes(&self) -> [u8; Self::SIZE] {
        let mut out = [0u8; Self::SIZE];
        out[0..4].copy_from_slice(&self.i.to_le_bytes());
        out[4..8].copy_from_slice(&self.j.to_le_bytes());
        out[8..16].copy_from_slice(&self.x.to_le_bytes());
        out
    }

    pub fn from_bytes(buf: &[u8; Self::SIZE]) -> Self {
        let mut w = [0u8; 4];
        let mut f = [0u8; 8];
        w.copy_from_slice(&buf[0..4]);
        let i = u32::from_le_bytes(w);
        w.copy_from_slice(&buf[4..8]);
        let j = u32::from_le_bytes(w);
        f.copy_from_slice(&buf[8..16]);
        CoocRecord {
            i,
            j,
            x: f64::from_le_bytes(f),
        }
    }
}

/// Directed sparse map `(target, context) → weighted count`.
///
/// Stored counts are always strictly positive and never on the diagonal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoocMatrix {
    entries: HashMap<(WordId, WordId), f64>,
    vocab_size: usize,
}

impl CoocMatrix {
    pub fn new(vocab_size: usize) -> Self {
        CoocMatrix {
            entries: HashMap::new(),
            vocab_size,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: WordId, j: WordId) -> Option<f64> {
        self.entries.get(&(i, j)).copied()
    }

    /// Adds `w` to entry `(i, j)`.
    pub fn accumulate(&mut self, i: WordId, j: WordId, w: f64) -> Result<()> {
        if i == j {
            return Err(Error::SelfPair(i));
        }
        // also rejects NaN
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonPositiveWeight(w));
        }
        for id in [i, j] {
            if id as usize >= self.vocab_size {
                return Err(Error::IdOutOfRange {
                    id,
                    size: self.vocab_size,
                });
            }
        }
        *self.entries.entry((i, j)).or_insert(0.0) += w;
        Ok(())
    }

    /// Entry-wise sum. Associative and commutative up to f64 rounding.
    pub fn merge(&mut self, other: CoocMatrix) {
        self.vocab_size = self.vocab_size.max(other.vocab_size);
        if other.entries.len() > self.entries.len() {
            let mine = core::mem::replace(&mut self.entries, other.entries);
            for (k, v) in mine {
                *self.entries.entry(k).or_insert(0.0) += v;
            }
        } else {
            for (k, v) in other.entries {
                *self.entries.entry(k).or_insert(0.0) += v;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = CoocRecord> + '_ {
        self.entries.iter().map(|(&(i, j), &x)| CoocRecord { i, j, x })
    }

    /// Records sorted by `(i, j)`.
    pub fn to_sorted_records(&self) -> Vec<CoocRecord> {
        let mut out: Vec<CoocRecord> = self.iter().collect();
        out.sort_unstable_by_key(|r| (r.i, r.j));
        out
    }

    /// Rebuilds a matrix from records, summing duplicates.
    ///
    /// `vocab_size` of the result is one past the largest id seen.
    pub fn from_records<I: IntoIterator<Item = CoocRecord>>(records: I) -> Result<Self> {
        let mut m = CoocMatrix::new(usize::MAX);
        let mut max_id = None::<WordId>;
        for r in records {
            m.accumulate(r.i, r.j, r.x)?;
            let hi = r.i.max(r.j);
            max_id = Some(max_id.map_or(hi, |m| m.max(hi)));
        }
        m.vocab_size = max_id.map_or(0, |m| m as usize + 1);
        Ok(m)
    }

    /// Keeps the support of `support`, taking values from `values`.
    ///
    /// Pairs absent from `values` are dropped since a zero count cannot be
    /// stored.
    pub fn intersect(support: &CoocMatrix, values: &CoocMatrix) -> CoocMatrix {
        let mut out = CoocMatrix::new(support.vocab_size.max(values.vocab_size));
        for &(i, j) in support.entries.keys() {
            if let Some(&x) = values.entries.get(&(i, j)) {
                out.entries.insert((i, j), x);
            }
        }
        out
    }
}
