//! Word-similarity benchmarks: `word1<TAB>word2<TAB>score`, `#` comments.

use std::io::BufRead;
use std::path::Path;

use semglove_core::eval::SimilarityDataset;

use super::open;
use crate::error::{Error, Result};

/// Words are lowercased. Whitespace other than tabs is accepted as a
/// separator when a line has no tab.
pub fn read_dataset<R: BufRead>(input: R, name: &str, path: &Path) -> Result<SimilarityDataset> {
    let mut pairs = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let [a, b, score] = fields[..] else {
            return Err(Error::parse(path, lineno, "expected 'word1 word2 score'"));
        };
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(path, lineno, format!("invalid score '{score}'")))?;
        pairs.push((a.to_lowercase(), b.to_lowercase(), score));
    }
    if pairs.is_empty() {
        return Err(Error::format(path, "dataset has no pairs"));
    }
    Ok(SimilarityDataset {
        name: name.to_string(),
        pairs,
    })
}

/// The dataset is named after the file stem.
pub fn load_dataset(path: &Path) -> Result<SimilarityDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_dataset(open(path)?, &name, path)
}
