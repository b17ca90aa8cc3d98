//! `word<TAB>id1 id2 ... idm` per line.

use std::io::{BufRead, Write};
use std::path::Path;

use semglove_core::SubwordLexicon;

use super::{create, open};
use crate::error::{Error, Result};

pub fn write_lexicon<W: Write>(lex: &SubwordLexicon, mut out: W) -> std::io::Result<()> {
    for (word, ids) in lex.iter() {
        write!(out, "{word}\t")?;
        for (k, id) in ids.iter().enumerate() {
            if k > 0 {
                out.write_all(b" ")?;
            }
            write!(out, "{id}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_lexicon(lex: &SubwordLexicon, path: &Path) -> Result<()> {
    write_lexicon(lex, create(path)?).map_err(|e| Error::io(path, e))
}

pub fn read_lexicon<R: BufRead>(input: R, path: &Path) -> Result<SubwordLexicon> {
    let mut lex = SubwordLexicon::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 1;
        let (word, ids) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected 'word<TAB>ids'"))?;
        let ids = ids
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|_| Error::parse(path, lineno, format!("invalid subword id '{s}'")))
            })
            .collect::<Result<Vec<u32>>>()?;
        lex.insert(word, ids)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    }
    Ok(lex)
}

pub fn load_lexicon(path: &Path) -> Result<SubwordLexicon> {
    read_lexicon(open(path)?, path)
}
