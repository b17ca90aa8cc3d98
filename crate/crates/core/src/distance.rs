//! Mapping ranked relevance scores to co-occurrence weights.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    /// Score divided by the top score of its row.
    #[default]
    Division,
    /// `1/t` for the `t`-th ranked item, ignoring score magnitudes.
    Rank,
}

impl Distance {
    /// Weights for scores already sorted in descending order.
    ///
    /// Division weights lie in `(0, 1]` when all scores are positive, with the
    /// first weight exactly 1.
    pub fn weights(self, sorted_scores: &[f64]) -> Vec<f64> {
        match self {
            Distance::Division => match sorted_scores.first() {
                Some(&top) => sorted_scores.iter().map(|s| s / top).collect(),
                None => Vec::new(),
            },
            Distance::Rank => (1..=sorted_scores.len()).map(|t| 1.0 / t as f64).collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Distance::Division => "division",
            Distance::Rank => "rank",
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "division" => Ok(Distance::Division),
            "rank" => Ok(Distance::Rank),
            other => Err(Error::Config(format!(
                "unknown distance '{other}', expected division or rank"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn division_normalizes_by_top() {
        let w = Distance::Division.weights(&[14.7, 9.45]);
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 9.45 / 14.7);
        assert!((w[1] - 0.643).abs() < 5e-4);
    }

    #[test]
    fn rank_is_harmonic() {
        assert_eq!(Distance::Rank.weights(&[3.0, 2.0, 1.0]), vec![1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn parses_names() {
        assert_eq!("rank".parse::<Distance>().unwrap(), Distance::Rank);
        assert_eq!("division".parse::<Distance>().unwrap(), Distance::Division);
        assert!("cosine".parse::<Distance>().is_err());
        assert!(Distance::Division.weights(&[]).is_empty());
    }
}
