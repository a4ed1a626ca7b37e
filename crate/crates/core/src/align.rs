//! Paired tag/word alignment and the deviation metric.
//!
//! Paired alignment puts tags 2n-1 and 2n on word n's row (the last word has
//! only one tag). A word's deviation is the distance between its row and the
//! row holding its shift tag; in-order linearizations are shift-aligned, so
//! their deviation is zero everywhere.

use thiserror::Error;

use crate::linearize::{linearize, LinearizeError, Scheme, Tag};
use crate::treebank::ParseTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("tag sequence has even length {0}; linearizations have length 2N-1")]
    EvenLength(usize),
    #[error("empty tag sequence")]
    Empty,
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
}

/// Per-word lists of 1-based global tag indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub assignments: Vec<Vec<usize>>,
}

/// Assign tags 2n-1 and 2n to word n; word N keeps only tag 2N-1.
pub fn paired_alignment(tags: &[Tag]) -> Result<Alignment, AlignError> {
    if tags.is_empty() {
        return Err(AlignError::Empty);
    }
    if tags.len().is_multiple_of(2) {
        return Err(AlignError::EvenLength(tags.len()));
    }
    let n = tags.len().div_ceil(2);
    let assignments = (1..=n)
        .map(|word| {
            if word < n {
                vec![2 * word - 1, 2 * word]
            } else {
                vec![2 * n - 1]
            }
        })
        .collect();
    Ok(Alignment { assignments })
}

/// Word-level deviations of a tree's linearization, with max and mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationProfile {
    pub deviations: Vec<usize>,
    pub max: usize,
    pub mean: f64,
}

/// Deviation of each word under the paired alignment of the scheme's tags.
pub fn deviation_profile(
    tree: &ParseTree,
    scheme: Scheme,
) -> Result<DeviationProfile, AlignError> {
    let seq = linearize(tree, scheme)?;
    if seq.tags.len() % 2 == 0 {
        return Err(AlignError::EvenLength(seq.tags.len()));
    }
    let mut deviations = Vec::with_capacity(seq.n);
    let mut word = 0usize;
    for (i, tag) in seq.tags.iter().enumerate() {
        if tag.is_shift() {
            word += 1;
            let m = i + 1;
            let row = m.div_ceil(2);
            deviations.push(word.abs_diff(row));
        }
    }
    let max = deviations.iter().copied().max().unwrap_or(0);
    let mean = if deviations.is_empty() {
        0.0
    } else {
        deviations.iter().sum::<usize>() as f64 / deviations.len() as f64
    };
    Ok(DeviationProfile { deviations, max, mean })
}

/// Corpus-level histogram of word deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationHistogram {
    /// `counts[d]` is the number of words with deviation `d`; deviations at
    /// or beyond the last bin are folded into it.
    pub counts: Vec<u64>,
    pub words: u64,
    pub max: usize,
    pub mean: f64,
}

impl DeviationHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("deviation,count\n");
        for (d, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{d},{c}\n"));
        }
        out
    }
}

/// Histogram of word-level deviations over a corpus, truncated to `bins`
/// rows (the last row absorbs anything larger).
pub fn deviation_histogram(
    trees: &[ParseTree],
    scheme: Scheme,
    bins: usize,
) -> Result<DeviationHistogram, AlignError> {
    if trees.is_empty() {
        return Err(AlignError::Empty);
    }
    let bins = bins.max(1);
    let mut counts = vec![0u64; bins];
    let mut words = 0u64;
    let mut sum = 0u64;
    let mut max = 0usize;
    for tree in trees {
        let profile = deviation_profile(tree, scheme)?;
        for d in profile.deviations {
            counts[d.min(bins - 1)] += 1;
            words += 1;
            sum += d as u64;
            max = max.max(d);
        }
    }
    let mean = if words == 0 { 0.0 } else { sum as f64 / words as f64 };
    Ok(DeviationHistogram { counts, words, max, mean })
}
