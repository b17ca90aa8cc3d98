//! Lock-free multi-threaded AdaGrad.
//!
//! Threads share every parameter and accumulator without locks. Each scalar
//! is an `AtomicU64` holding f64 bits, read and written with relaxed
//! ordering: updates from different threads may interleave per scalar, and
//! a whole row is never read atomically. With one thread the run defers to
//! the sequential trainer and is bit-reproducible.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::thread;

use semglove_core::glove::{self, adagrad_step, EmbeddingSet, ParamRow, TrainConfig};
use semglove_core::CoocRecord;

use crate::error::Result;

struct SharedArray(Vec<AtomicU64>);

impl SharedArray {
    fn from(values: &[f64]) -> Self {
        SharedArray(values.iter().map(|v| AtomicU64::new(v.to_bits())).collect())
    }

    #[inline]
    fn load(&self, start: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.0[start..]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    #[inline]
    fn store(&self, start: usize, values: &[f64]) {
        for (v, a) in values.iter().zip(&self.0[start..]) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f64> {
        self.0.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}

struct Shared {
    dim: usize,
    vocab_size: usize,
    target: SharedArray,
    context: SharedArray,
    bias: SharedArray,
    context_bias: SharedArray,
    grad_sq_target: SharedArray,
    grad_sq_context: SharedArray,
    grad_sq_bias: SharedArray,
    grad_sq_context_bias: SharedArray,
}

impl Shared {
    fn new(e: &EmbeddingSet) -> Self {
        Shared {
            dim: e.dim,
            vocab_size: e.vocab_size,
            target: SharedArray::from(&e.target),
            context: SharedArray::from(&e.context),
            bias: SharedArray::from(&e.bias),
            context_bias: SharedArray::from(&e.context_bias),
            grad_sq_target: SharedArray::from(&e.grad_sq_target),
            grad_sq_context: SharedArray::from(&e.grad_sq_context),
            grad_sq_bias: SharedArray::from(&e.grad_sq_bias),
            grad_sq_context_bias: SharedArray::from(&e.grad_sq_context_bias),
        }
    }

    fn into_embeddings(self) -> EmbeddingSet {
        EmbeddingSet {
            dim: self.dim,
            vocab_size: self.vocab_size,
            target: self.target.into_vec(),
            context: self.context.into_vec(),
            bias: self.bias.into_vec(),
            context_bias: self.context_bias.into_vec(),
            grad_sq_target: self.grad_sq_target.into_vec(),
            grad_sq_context: self.grad_sq_context.into_vec(),
            grad_sq_bias: self.grad_sq_bias.into_vec(),
            grad_sq_context_bias: self.grad_sq_context_bias.into_vec(),
        }
    }
}

/// Thread-local copy of one word's parameters on one side.
struct RowBuf {
    vector: Vec<f64>,
    grad_sq: Vec<f64>,
    bias: [f64; 1],
    grad_sq_bias: [f64; 1],
}

impl RowBuf {
    fn new(dim: usize) -> Self {
        RowBuf {
            vector: vec![0.0; dim],
            grad_sq: vec![0.0; dim],
            bias: [0.0],
            grad_sq_bias: [0.0],
        }
    }

    fn row(&mut self) -> ParamRow<'_> {
        ParamRow {
            vector: &mut self.vector,
            bias: &mut self.bias[0],
            grad_sq: &mut self.grad_sq,
            grad_sq_bias: &mut self.grad_sq_bias[0],
        }
    }
}

fn run_range(shared: &Shared, records: &[CoocRecord], first: u64, cfg: &TrainConfig) -> Result<f64> {
    let d = shared.dim;
    let mut t = RowBuf::new(d);
    let mut c = RowBuf::new(d);
    let mut total = 0.0;
    for (k, r) in records.iter().enumerate() {
        let (i, j) = (r.i as usize, r.j as usize);
        shared.target.load(i * d, &mut t.vector);
        shared.grad_sq_target.load(i * d, &mut t.grad_sq);
        shared.bias.load(i, &mut t.bias);
        shared.grad_sq_bias.load(i, &mut t.grad_sq_bias);
        shared.context.load(j * d, &mut c.vector);
        shared.grad_sq_context.load(j * d, &mut c.grad_sq);
        shared.context_bias.load(j, &mut c.bias);
        shared.grad_sq_context_bias.load(j, &mut c.grad_sq_bias);

        total += adagrad_step(t.row(), c.row(), r.x, cfg, first + k as u64)?;

        shared.target.store(i * d, &t.vector);
        shared.grad_sq_target.store(i * d, &t.grad_sq);
        shared.bias.store(i, &t.bias);
        shared.grad_sq_bias.store(i, &t.grad_sq_bias);
        shared.context.store(j * d, &c.vector);
        shared.grad_sq_context.store(j * d, &c.grad_sq);
        shared.context_bias.store(j, &c.bias);
        shared.grad_sq_context_bias.store(j, &c.grad_sq_bias);
    }
    Ok(total)
}

/// Records handed to a worker at a time.
const BLOCK: usize = 64;

/// One epoch with `threads` workers. Workers claim consecutive blocks from a
/// shared cursor, so the stream is consumed close to file order whatever the
/// scheduling. Returns the epoch-mean loss.
fn parallel_epoch(shared: &Shared, records: &[CoocRecord], cfg: &TrainConfig, workers: usize) -> Result<f64> {
    let cursor = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let worker = || -> Result<f64> {
        let mut total = 0.0;
        while !failed.load(Ordering::Relaxed) {
            let start = cursor.fetch_add(BLOCK, Ordering::Relaxed);
            if start >= records.len() {
                break;
            }
            let end = (start + BLOCK).min(records.len());
            match run_range(shared, &records[start..end], start as u64, cfg) {
                Ok(loss) => total += loss,
                Err(e) => {
                    failed.store(true, Ordering::Relaxed);
                    return Err(e);
                }
            }
        }
        Ok(total)
    };
    let totals: Vec<Result<f64>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers).map(|_| s.spawn(worker)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    let mut sum = 0.0;
    for t in totals {
        sum += t?;
    }
    Ok(if records.is_empty() {
        0.0
    } else {
        sum / records.len() as f64
    })
}

/// Worker threads actually used for `threads` requested. More workers than
/// cores only hurts: a worker preempted mid-record writes back rows that went
/// stale during its whole time slice.
pub fn workers(threads: usize) -> usize {
    let cores = thread::available_parallelism().map_or(1, |n| n.get());
    threads.clamp(1, cores)
}

/// Trains on `records` for `cfg.iterations` epochs. `on_epoch` receives the
/// epoch number and its mean loss.
pub fn train<F>(vocab_size: usize, records: &[CoocRecord], cfg: &TrainConfig, mut on_epoch: F) -> Result<EmbeddingSet>
where
    F: FnMut(usize, f64),
{
    if cfg.threads <= 1 {
        return Ok(glove::train(vocab_size, records, cfg, on_epoch)?);
    }
    cfg.validate()?;
    for r in records {
        for id in [r.i, r.j] {
            if id as usize >= vocab_size {
                return Err(semglove_core::Error::IdOutOfRange { id, size: vocab_size }.into());
            }
        }
    }
    let workers = workers(cfg.threads);
    let shared = Shared::new(&EmbeddingSet::init(vocab_size, cfg.dim, cfg.seed));
    for epoch in 0..cfg.iterations {
        let loss = parallel_epoch(&shared, records, cfg, workers)?;
        on_epoch(epoch, loss);
    }
    Ok(shared.into_embeddings())
}
