//! Word-similarity evaluation: Spearman correlation between human ratings
//! and cosine similarities.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::vocab::{Vocabulary, WordId};

/// Dense `V × d` table of final word vectors in vocabulary id order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    dim: usize,
    data: Vec<f64>,
}

impl WordVectors {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "ragged vector table");
        WordVectors { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let nu: f64 = u.iter().map(|x| x * x).sum();
    let nv: f64 = v.iter().map(|x| x * x).sum();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / libm::sqrt(nu * nv)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(Ordering::Equal));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = mean;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooShort(xs.len()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub spearman: f64,
    pub covered: usize,
    pub total: usize,
}

/// Spearman over the pairs whose two words both have vectors.
pub fn evaluate(vocab: &Vocabulary, vectors: &WordVectors, dataset: &SimilarityDataset) -> Result<EvalReport> {
    let total = dataset.pairs.len();
    let mut human = Vec::new();
    let mut model = Vec::new();
    for (a, b, score) in &dataset.pairs {
        let (Some(i), Some(j)) = (vocab.id(a), vocab.id(b)) else {
            continue;
        };
        human.push(*score);
        model.push(cosine(vectors.row(i as usize), vectors.row(j as usize))?);
    }
    let covered = human.len();
    if covered < 2 {
        return Err(Error::InsufficientCoverage { covered, total });
    }
    Ok(EvalReport {
        dataset: dataset.name.clone(),
        spearman: spearman(&human, &model)?,
        covered,
        total,
    })
}

/// The `k` words closest to `word` by cosine, excluding itself. Words with a
/// zero vector are skipped.
pub fn nearest(vocab: &Vocabulary, vectors: &WordVectors, word: &str, k: usize) -> Option<Vec<(WordId, f64)>> {
    let q = vocab.id(word)?;
    let query = vectors.row(q as usize);
    let mut scored: Vec<(WordId, f64)> = (0..vectors.len() as WordId)
        .filter(|&j| j != q)
        .filter_map(|j| cosine(query, vectors.row(j as usize)).ok().map(|s| (j, s)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Some(scored)
}
