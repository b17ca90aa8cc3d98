//! On-disk formats. Text formats are UTF-8 with LF line endings; binary
//! formats are little-endian.

pub mod cooc;
pub mod dataset;
pub mod lexicon;
pub mod sgdv;
pub mod vectors;
pub mod vocab;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}
