//! Headerless stream of 16-byte `(i: u32, j: u32, x: f64)` records.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semglove_core::{CoocMatrix, CoocRecord};

use super::{create, open};
use crate::error::{Error, Result};

pub fn write_records<'a, W, I>(mut out: W, records: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a CoocRecord>,
{
    for r in records {
        out.write_all(&r.to_bytes())?;
    }
    out.flush()
}

/// `path` only labels errors.
pub fn read_records<R: Read>(mut input: R, path: &Path) -> Result<Vec<CoocRecord>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() % CoocRecord::SIZE != 0 {
        return Err(Error::format(
            path,
            format!(
                "{} bytes is not a whole number of {}-byte records",
                bytes.len(),
                CoocRecord::SIZE
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(CoocRecord::SIZE)
        .map(|c| CoocRecord::from_bytes(c.try_into().expect("chunk size")))
        .collect())
}

pub fn load_records(path: &Path) -> Result<Vec<CoocRecord>> {
    read_records(open(path)?, path)
}

pub fn save_records(records: &[CoocRecord], path: &Path) -> Result<()> {
    write_records(create(path)?, records).map_err(|e| Error::io(path, e))
}

/// Writes the matrix sorted by `(i, j)`.
pub fn save_bin(m: &CoocMatrix, path: &Path) -> Result<()> {
    save_records(&m.to_sorted_records(), path)
}

pub fn load_bin(path: &Path) -> Result<CoocMatrix> {
    Ok(CoocMatrix::from_records(load_records(path)?)?)
}

/// Seeded uniform permutation of a record file.
pub fn shuffle(input: &Path, output: &Path, seed: u64) -> Result<usize> {
    let mut records = load_records(input)?;
    shuffle_records(&mut records, seed);
    save_records(&records, output)?;
    Ok(records.len())
}

pub fn shuffle_records(records: &mut [CoocRecord], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
}
