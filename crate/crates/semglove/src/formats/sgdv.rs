//! SGDV score dumps.
//!
//! ```text
//! header   "SGDV" | version u32 | mode u8 | top_k u32 | n_layers u32 | n_heads u32
//! record   L u32 | W u32 | subword_counts W×u32 | bpe_ids L×u32 | payload
//! payload  SAN: L×L f32, row-major summed attention
//!          MLM: per position, top_k × (token u32, logit f32)
//! ```
//!
//! Everything is little-endian and packed; records run to end of file.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use semglove_core::dump::{DumpHeader, DumpMode, MlmRecord, Prediction, SanRecord};

use super::{create, open};
use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 21;

/// Guards allocations against corrupt length fields.
pub const MAX_TOKENS: u32 = 1 << 14;

/// Relative tolerance on SAN row sums used by [`validate`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub enum DumpRecord {
    San(SanRecord),
    Mlm(MlmRecord),
}

pub fn encode_header(h: &DumpHeader) -> [u8; HEADER_SIZE] {
    let mut out = [0u8; HEADER_SIZE];
    out[0..4].copy_from_slice(&DumpHeader::MAGIC);
    out[4..8].copy_from_slice(&DumpHeader::VERSION.to_le_bytes());
    out[8] = h.mode.code();
    out[9..13].copy_from_slice(&h.top_k.to_le_bytes());
    out[13..17].copy_from_slice(&h.n_layers.to_le_bytes());
    out[17..21].copy_from_slice(&h.n_heads.to_le_bytes());
    out
}

pub fn decode_header(bytes: &[u8; HEADER_SIZE]) -> std::result::Result<DumpHeader, String> {
    if bytes[0..4] != DumpHeader::MAGIC {
        return Err("bad magic, not an SGDV dump".into());
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != DumpHeader::VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let mode = DumpMode::from_code(bytes[8]).ok_or_else(|| format!("invalid mode {}", bytes[8]))?;
    let header = DumpHeader {
        mode,
        top_k: u32_at(9),
        n_layers: u32_at(13),
        n_heads: u32_at(17),
    };
    header.validate().map_err(|e| e.to_string())?;
    Ok(header)
}

/// Streaming reader over one dump file.
#[derive(Debug)]
pub struct DumpReader<R> {
    input: R,
    header: DumpHeader,
    path: PathBuf,
    index: u64,
    broken: bool,
}

impl DumpReader<std::io::BufReader<std::fs::File>> {
    pub fn open(path: &Path) -> Result<Self> {
        DumpReader::new(open(path)?, path)
    }
}

impl<R: BufRead> DumpReader<R> {
    /// Reads and checks the header. `path` only labels errors.
    pub fn new(mut input: R, path: &Path) -> Result<Self> {
        let mut buf = [0u8; HEADER_SIZE];
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::format(path, "file too short for an SGDV header"))?;
        let header = decode_header(&buf).map_err(|m| Error::format(path, m))?;
        Ok(DumpReader {
            input,
            header,
            path: path.to_path_buf(),
            index: 0,
            broken: false,
        })
    }

    pub fn header(&self) -> &DumpHeader {
        &self.header
    }

    /// Index the next record will have.
    pub fn position(&self) -> u64 {
        self.index
    }

    fn truncated(&self) -> Error {
        Error::format(&self.path, format!("record {} is truncated", self.index))
    }

    fn read_u32s(&mut self, n: usize) -> Result<Vec<u32>> {
        let mut out = vec![0u32; n];
        self.input
            .read_u32_into::<LittleEndian>(&mut out)
            .map_err(|_| self.truncated())?;
        Ok(out)
    }

    fn read_raw(&mut self) -> Result<Option<DumpRecord>> {
        let at_end = self.input.fill_buf().map_err(|e| Error::io(&self.path, e))?.is_empty();
        if at_end {
            return Ok(None);
        }
        let l = self.input.read_u32::<LittleEndian>().map_err(|_| self.truncated())?;
        let w = self.input.read_u32::<LittleEndian>().map_err(|_| self.truncated())?;
        if l > MAX_TOKENS || w > MAX_TOKENS {
            return Err(Error::format(
                &self.path,
                format!("record {}: implausible sizes L={l} W={w}", self.index),
            ));
        }
        let (l, w) = (l as usize, w as usize);
        let subword_counts = self.read_u32s(w)?;
        let bpe_ids = self.read_u32s(l)?;
        let rec = match self.header.mode {
            DumpMode::San => {
                let mut attn = vec![0f32; l * l];
                self.input
                    .read_f32_into::<LittleEndian>(&mut attn)
                    .map_err(|_| self.truncated())?;
                DumpRecord::San(SanRecord {
                    subword_counts,
                    bpe_ids,
                    attn,
                })
            }
            DumpMode::Mlm => {
                let k = self.header.top_k as usize;
                let mut predictions = Vec::with_capacity(l * k);
                for _ in 0..l * k {
                    let token = self.input.read_u32::<LittleEndian>().map_err(|_| self.truncated())?;
                    let logit = self.input.read_f32::<LittleEndian>().map_err(|_| self.truncated())?;
                    predictions.push(Prediction { token, logit });
                }
                DumpRecord::Mlm(MlmRecord {
                    subword_counts,
                    bpe_ids,
                    predictions,
                })
            }
        };
        Ok(Some(rec))
    }

    /// Next record without invariant checks. Structural errors end the
    /// stream.
    pub fn next_unchecked(&mut self) -> Option<Result<DumpRecord>> {
        if self.broken {
            return None;
        }
        match self.read_raw() {
            Ok(Some(rec)) => {
                self.index += 1;
                Some(Ok(rec))
            }
            Ok(None) => None,
            Err(e) => {
                self.broken = true;
                Some(Err(e))
            }
        }
    }
}

fn check(header: &DumpHeader, rec: &DumpRecord, index: u64, strict: bool) -> semglove_core::Result<()> {
    match rec {
        DumpRecord::San(r) => r.validate(index),
        DumpRecord::Mlm(r) => r.validate(index, header.top_k as usize, strict),
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<DumpRecord>;

    /// Records that break an invariant are reported as errors; reading may
    /// continue past them.
    fn next(&mut self) -> Option<Self::Item> {
        let index = self.index;
        let rec = match self.next_unchecked()? {
            Ok(rec) => rec,
            Err(e) => return Some(Err(e)),
        };
        Some(
            check(&self.header, &rec, index, false)
                .map(|_| rec)
                .map_err(Error::from),
        )
    }
}

/// Dump writer; checks every record before it touches the output.
#[derive(Debug)]
pub struct DumpWriter<W: Write> {
    out: W,
    header: DumpHeader,
    index: u64,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(mut out: W, header: DumpHeader) -> Result<Self> {
        header.validate()?;
        out.write_all(&encode_header(&header))
            .map_err(|e| Error::io("<dump>", e))?;
        Ok(DumpWriter { out, header, index: 0 })
    }

    pub fn write(&mut self, rec: &DumpRecord) -> Result<()> {
        let mode = match rec {
            DumpRecord::San(_) => DumpMode::San,
            DumpRecord::Mlm(_) => DumpMode::Mlm,
        };
        self.header.expect_mode(mode)?;
        check(&self.header, rec, self.index, true)?;
        self.encode(rec).map_err(|e| Error::io("<dump>", e))?;
        self.index += 1;
        Ok(())
    }

    fn encode(&mut self, rec: &DumpRecord) -> std::io::Result<()> {
        let (counts, ids) = match rec {
            DumpRecord::San(r) => (&r.subword_counts, &r.bpe_ids),
            DumpRecord::Mlm(r) => (&r.subword_counts, &r.bpe_ids),
        };
        let out = &mut self.out;
        out.write_u32::<LittleEndian>(ids.len() as u32)?;
        out.write_u32::<LittleEndian>(counts.len() as u32)?;
        for &c in counts.iter().chain(ids.iter()) {
            out.write_u32::<LittleEndian>(c)?;
        }
        match rec {
            DumpRecord::San(r) => {
                for &a in &r.attn {
                    out.write_f32::<LittleEndian>(a)?;
                }
            }
            DumpRecord::Mlm(r) => {
                for p in &r.predictions {
                    out.write_u32::<LittleEndian>(p.token)?;
                    out.write_f32::<LittleEndian>(p.logit)?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush().map_err(|e| Error::io("<dump>", e))?;
        Ok(self.out)
    }
}

/// Writes a whole dump. Nothing is created when the header or any record is
/// invalid.
pub fn write_dump<'a, I>(path: &Path, header: &DumpHeader, records: I) -> Result<()>
where
    I: IntoIterator<Item = &'a DumpRecord>,
{
    let mut buf = DumpWriter::new(Vec::new(), *header)?;
    for rec in records {
        buf.write(rec)?;
    }
    let bytes = buf.finish()?;
    let mut out = create(path)?;
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Header plus every record, checked.
pub fn read_dump(path: &Path) -> Result<(DumpHeader, Vec<DumpRecord>)> {
    let reader = DumpReader::open(path)?;
    let header = *reader.header();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub header: DumpHeader,
    pub records: u64,
    pub hard_errors: Vec<String>,
    /// SAN records with at least one row off `n_layers × n_heads`.
    pub flagged_records: u64,
    pub flagged_rows: u64,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.hard_errors.is_empty()
    }
}

/// Reads a whole dump, collecting invariant violations instead of stopping
/// at the first. SAN row-sum deviations are counted, not treated as errors.
pub fn validate(path: &Path) -> Result<ValidationReport> {
    let mut reader = DumpReader::open(path)?;
    let header = *reader.header();
    let expected = header.heads_total();
    let mut report = ValidationReport {
        header,
        records: 0,
        hard_errors: Vec::new(),
        flagged_records: 0,
        flagged_rows: 0,
    };
    while let Some(next) = reader.next_unchecked() {
        let rec = match next {
            Ok(rec) => rec,
            Err(e) => {
                report.hard_errors.push(e.to_string());
                break;
            }
        };
        if let Err(e) = check(&header, &rec, report.records, false) {
            report.hard_errors.push(e.to_string());
        } else if let DumpRecord::San(r) = &rec {
            let rows = r.row_sum_violations(expected, ROW_SUM_TOLERANCE) as u64;
            if rows > 0 {
                report.flagged_records += 1;
                report.flagged_rows += rows;
            }
        }
        report.records += 1;
    }
    Ok(report)
}
