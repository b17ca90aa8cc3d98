//! Weighted least-squares objective over log co-occurrence counts and its
//! AdaGrad optimizer.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooc::CoocRecord;
use crate::error::{Error, Result};
use crate::eval::WordVectors;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub lr: f64,
    pub iterations: usize,
    pub threads: usize,
    pub seed: u64,
    /// Per-scalar gradient clamp applied before the AdaGrad update.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            x_max: 10.0,
            alpha: 0.75,
            lr: 0.05,
            iterations: 100,
            threads: 1,
            seed: 1,
            grad_clip: Some(100.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.x_max.is_nan() || self.x_max <= 0.0 {
            return fail("x_max must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must be in (0, 1]");
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return fail("lr must be positive");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        if let Some(c) = self.grad_clip {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config(format!("grad_clip must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Down-weights rare pairs: `(x / x_max)^alpha` below `x_max`, 1 above.
pub fn weight_f(x: f64, x_max: f64, alpha: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::NonPositiveCount(x));
    }
    Ok(if x < x_max { libm::pow(x / x_max, alpha) } else { 1.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    /// Same for both biases.
    pub bias: f64,
}

/// Loss `f(x) (e·e' + b + b' - ln x)^2` of one pair and its exact gradient.
pub fn loss_and_grad(
    target: &[f64],
    context: &[f64],
    bias: f64,
    context_bias: f64,
    x: f64,
    x_max: f64,
    alpha: f64,
) -> Result<(f64, PairGradient)> {
    let f = weight_f(x, x_max, alpha)?;
    let r = dot(target, context) + bias + context_bias - libm::log(x);
    let g = 2.0 * f * r;
    Ok((
        f * r * r,
        PairGradient {
            target: context.iter().map(|c| g * c).collect(),
            context: target.iter().map(|t| g * t).collect(),
            bias: g,
        },
    ))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mutable view of one word's parameters on one side of the model.
#[derive(Debug)]
pub struct ParamRow<'a> {
    pub vector: &'a mut [f64],
    pub bias: &'a mut f64,
    pub grad_sq: &'a mut [f64],
    pub grad_sq_bias: &'a mut f64,
}

impl ParamRow<'_> {
    fn is_finite(&self) -> bool {
        self.bias.is_finite()
            && self.grad_sq_bias.is_finite()
            && self.vector.iter().all(|v| v.is_finite())
            && self.grad_sq.iter().all(|v| v.is_finite())
    }
}

/// One AdaGrad step on a single co-occurrence. Returns the pair loss
/// measured before the update.
///
/// `record` only labels the error when a parameter stops being finite.
pub fn adagrad_step(
    target: ParamRow<'_>,
    context: ParamRow<'_>,
    x: f64,
    cfg: &TrainConfig,
    record: u64,
) -> Result<f64> {
    let f = weight_f(x, cfg.x_max, cfg.alpha)?;
    let r = dot(target.vector, context.vector) + *target.bias + *context.bias - libm::log(x);
    let g = 2.0 * f * r;
    let clip = |v: f64| match cfg.grad_clip {
        Some(c) => v.clamp(-c, c),
        None => v,
    };
    for k in 0..target.vector.len() {
        let gt = clip(g * context.vector[k]);
        let gc = clip(g * target.vector[k]);
        target.vector[k] -= cfg.lr * gt / libm::sqrt(target.grad_sq[k]);
        context.vector[k] -= cfg.lr * gc / libm::sqrt(context.grad_sq[k]);
        target.grad_sq[k] += gt * gt;
        context.grad_sq[k] += gc * gc;
    }
    let gb = clip(g);
    *target.bias -= cfg.lr * gb / libm::sqrt(*target.grad_sq_bias);
    *context.bias -= cfg.lr * gb / libm::sqrt(*context.grad_sq_bias);
    *target.grad_sq_bias += gb * gb;
    *context.grad_sq_bias += gb * gb;
    if !(target.is_finite() && context.is_finite()) {
        return Err(Error::NonFinite { record });
    }
    Ok(f * r * r)
}

/// Target and context vectors, biases, and their AdaGrad accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub vocab_size: usize,
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    pub bias: Vec<f64>,
    pub context_bias: Vec<f64>,
    pub grad_sq_target: Vec<f64>,
    pub grad_sq_context: Vec<f64>,
    pub grad_sq_bias: Vec<f64>,
    pub grad_sq_context_bias: Vec<f64>,
}

impl EmbeddingSet {
    /// Vectors uniform in `(-0.5/d, 0.5/d)`, zero biases, accumulators at 1.
    pub fn init(vocab_size: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 0.5 / dim as f64;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-half..half)).collect() };
        let target = draw(vocab_size * dim);
        let context = draw(vocab_size * dim);
        EmbeddingSet {
            dim,
            vocab_size,
            target,
            context,
            bias: vec![0.0; vocab_size],
            context_bias: vec![0.0; vocab_size],
            grad_sq_target: vec![1.0; vocab_size * dim],
            grad_sq_context: vec![1.0; vocab_size * dim],
            grad_sq_bias: vec![1.0; vocab_size],
            grad_sq_context_bias: vec![1.0; vocab_size],
        }
    }

    /// Target row of word `i` and context row of word `j`.
    pub fn rows_mut(&mut self, i: usize, j: usize) -> (ParamRow<'_>, ParamRow<'_>) {
        let d = self.dim;
        (
            ParamRow {
                vector: &mut self.target[i * d..(i + 1) * d],
                bias: &mut self.bias[i],
                grad_sq: &mut self.grad_sq_target[i * d..(i + 1) * d],
                grad_sq_bias: &mut self.grad_sq_bias[i],
            },
            ParamRow {
                vector: &mut self.context[j * d..(j + 1) * d],
                bias: &mut self.context_bias[j],
                grad_sq: &mut self.grad_sq_context[j * d..(j + 1) * d],
                grad_sq_bias: &mut self.grad_sq_context_bias[j],
            },
        )
    }

    pub fn target_row(&self, i: usize) -> &[f64] {
        &self.target[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_row(&self, i: usize) -> &[f64] {
        &self.context[i * self.dim..(i + 1) * self.dim]
    }

    /// Mean pair loss over `records` at the current parameters.
    pub fn mean_loss(&self, records: &[CoocRecord], cfg: &TrainConfig) -> Result<f64> {
        if records.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for r in records {
            let (i, j) = (r.i as usize, r.j as usize);
            let f = weight_f(r.x, cfg.x_max, cfg.alpha)?;
            let res =
                dot(self.target_row(i), self.context_row(j)) + self.bias[i] + self.context_bias[j] - libm::log(r.x);
            total += f * res * res;
        }
        Ok(total / records.len() as f64)
    }

    /// Final word vectors: target plus context vector of each word.
    pub fn finalize(&self) -> WordVectors {
        let data = self.target.iter().zip(&self.context).map(|(e, c)| e + c).collect();
        WordVectors::new(self.dim, data)
    }

    fn check_ids(&self, records: &[CoocRecord]) -> Result<()> {
        for r in records {
            for id in [r.i, r.j] {
                if id as usize >= self.vocab_size {
                    return Err(Error::IdOutOfRange {
                        id,
                        size: self.vocab_size,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One pass over `records` in order; returns the epoch-mean loss.
///
/// `first_index` is the position of `records[0]` in the full record stream.
pub fn train_epoch(emb: &mut EmbeddingSet, records: &[CoocRecord], cfg: &TrainConfig, first_index: u64) -> Result<f64> {
    let mut total = 0.0;
    for (k, r) in records.iter().enumerate() {
        let (t, c) = emb.rows_mut(r.i as usize, r.j as usize);
        total += adagrad_step(t, c, r.x, cfg, first_index + k as u64)?;
    }
    Ok(if records.is_empty() {
        0.0
    } else {
        total / records.len() as f64
    })
}

/// Single-threaded training: `cfg.iterations` epochs over `records` in the
/// given order. `on_epoch` receives the epoch number and mean loss.
pub fn train<F>(vocab_size: usize, records: &[CoocRecord], cfg: &TrainConfig, mut on_epoch: F) -> Result<EmbeddingSet>
where
    F: FnMut(usize, f64),
{
    cfg.validate()?;
    let mut emb = EmbeddingSet::init(vocab_size, cfg.dim, cfg.seed);
    emb.check_ids(records)?;
    for epoch in 0..cfg.iterations {
        let loss = train_epoch(&mut emb, records, cfg, 0)?;
        on_epoch(epoch, loss);
    }
    Ok(emb)
}
