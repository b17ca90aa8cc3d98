//! `word v1 ... vd` per line, values in shortest round-trip decimal.

use std::io::{BufRead, Write};
use std::path::Path;

use semglove_core::eval::WordVectors;
use semglove_core::Vocabulary;

use super::{create, open};
use crate::error::{Error, Result};

pub fn write_vectors<W: Write>(vocab: &Vocabulary, vectors: &WordVectors, mut out: W) -> std::io::Result<()> {
    for (id, word) in vocab.words().iter().enumerate() {
        out.write_all(word.as_bytes())?;
        for v in vectors.row(id) {
            // Display for f64 is the shortest string that parses back exactly
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_vectors(vocab: &Vocabulary, vectors: &WordVectors, path: &Path) -> Result<()> {
    if vocab.len() != vectors.len() {
        return Err(Error::Config(format!(
            "{} words but {} vectors",
            vocab.len(),
            vectors.len()
        )));
    }
    write_vectors(vocab, vectors, create(path)?).map_err(|e| Error::io(path, e))
}

/// Words come back as a vocabulary with zero counts.
pub fn read_vectors<R: BufRead>(input: R, path: &Path) -> Result<(Vocabulary, WordVectors)> {
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut dim = None;
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 1;
        let mut fields = line.split(' ');
        let word = fields
            .next()
            .filter(|w| !w.is_empty())
            .ok_or_else(|| Error::parse(path, lineno, "missing word"))?;
        let before = data.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid value '{f}'")))?;
            data.push(v);
        }
        let d = data.len() - before;
        match dim {
            None if d == 0 => return Err(Error::parse(path, lineno, "no vector values")),
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::parse(path, lineno, format!("{d} values, expected {expected}")))
            }
            Some(_) => {}
        }
        words.push((word.to_string(), 0u64));
    }
    let n = words.len();
    let vocab = Vocabulary::from_entries(words);
    if vocab.len() != n {
        return Err(Error::format(path, "duplicate word in vector file"));
    }
    let dim = dim.ok_or_else(|| Error::format(path, "empty vector file"))?;
    Ok((vocab, WordVectors::new(dim, data)))
}

pub fn load_vectors(path: &Path) -> Result<(Vocabulary, WordVectors)> {
    read_vectors(open(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<(Vocabulary, WordVectors)> {
        read_vectors(text.as_bytes(), Path::new("v.txt"))
    }

    #[test]
    fn exact_round_trip() {
        let vocab = Vocabulary::from_entries([("a", 1), ("b", 1)]);
        let vectors = WordVectors::new(3, vec![0.1, -1.0 / 3.0, 1e-300, f64::MAX, 0.0, -2.5]);
        let mut buf = Vec::new();
        write_vectors(&vocab, &vectors, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.split(' ').count() == 4));
        let (v2, x2) = read(&text).unwrap();
        assert_eq!(v2.words(), vocab.words());
        assert_eq!(x2, vectors);
    }

    #[test]
    fn ragged_lines_rejected() {
        assert!(matches!(read("a 1 2\nb 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read("a\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read(""), Err(Error::Format { .. })));
    }
}
