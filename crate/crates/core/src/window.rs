//! Positional window co-occurrence with harmonic `1/d` weighting.
//!
//! Every weight is a multiple of `1 / lcm(1..=S)`, so counts are accumulated
//! as exact integer numerators and divided once when the matrix is produced.
//! The result is therefore independent of summation order and of how the
//! corpus was sharded.

use hashbrown::HashMap;

use crate::cooc::CoocMatrix;
use crate::error::{Error, Result};
use crate::vocab::WordId;

/// Largest window whose `lcm(1..=S)` is exactly representable in an f64.
pub const MAX_WINDOW: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    /// Words on each side of the target.
    pub window: usize,
    /// When false only the left context is counted.
    pub symmetric: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window: 5,
            symmetric: true,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window > MAX_WINDOW {
            return Err(Error::Config(alloc::format!(
                "window must be in 1..={MAX_WINDOW}, got {}",
                self.window
            )));
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm(1..=s)`.
pub fn harmonic_denominator(s: usize) -> u64 {
    (1..=s as u64).fold(1, |acc, d| acc / gcd(acc, d) * d)
}

/// Exact window co-occurrence accumulator.
#[derive(Debug, Clone)]
pub struct WindowCounts {
    cfg: WindowConfig,
    denominator: u64,
    vocab_size: usize,
    numerators: HashMap<(WordId, WordId), u128>,
}

impl WindowCounts {
    pub fn new(vocab_size: usize, cfg: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(WindowCounts {
            cfg,
            denominator: harmonic_denominator(cfg.window),
            vocab_size,
            numerators: HashMap::new(),
        })
    }

    /// Adds the window pairs of one sentence.
    ///
    /// Out-of-vocabulary positions still count towards distances. Pairs of
    /// the same word are skipped.
    pub fn add_sentence(&mut self, ids: &[Option<WordId>]) -> Result<()> {
        let n = ids.len();
        let s = self.cfg.window;
        for (p, target) in ids.iter().enumerate() {
            let Some(target) = *target else { continue };
            if target as usize >= self.vocab_size {
                return Err(Error::IdOutOfRange {
                    id: target,
                    size: self.vocab_size,
                });
            }
            let hi = if self.cfg.symmetric { (p + s).min(n - 1) } else { p };
            for (q, context) in ids.iter().enumerate().take(hi + 1).skip(p.saturating_sub(s)) {
                if q == p {
                    continue;
                }
                let Some(context) = *context else { continue };
                if context == target {
                    continue;
                }
                let d = p.abs_diff(q) as u64;
                *self.numerators.entry((target, context)).or_insert(0) += u128::from(self.denominator / d);
            }
        }
        Ok(())
    }

    /// Folds in counts built with the same configuration.
    pub fn merge(&mut self, other: WindowCounts) {
        debug_assert_eq!(self.cfg, other.cfg);
        for (k, v) in other.numerators {
            *self.numerators.entry(k).or_insert(0) += v;
        }
    }

    pub fn into_matrix(self) -> Result<CoocMatrix> {
        let mut m = CoocMatrix::new(self.vocab_size);
        let denom = self.denominator as f64;
        for ((i, j), n) in self.numerators {
            m.accumulate(i, j, n as f64 / denom)?;
        }
        Ok(m)
    }
}

/// Builds the window matrix over `sentences`, clipping windows at sentence
/// boundaries.
pub fn build_window_cooc<'a, I>(sentences: I, vocab_size: usize, cfg: &WindowConfig) -> Result<CoocMatrix>
where
    I: IntoIterator<Item = &'a [Option<WordId>]>,
{
    let mut counts = WindowCounts::new(vocab_size, *cfg)?;
    for ids in sentences {
        counts.add_sentence(ids)?;
    }
    counts.into_matrix()
}
