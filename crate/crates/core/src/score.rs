//! Tag vocabularies, per-slot score tables standing in for a learner, the
//! factorized sequence score, and the production-weight tree score.
//!
//! Score files are JSON lines, one sentence per line; see [`read_scores`].
//! Everything is kept in the log domain, with minus infinity written to files
//! as a sentinel at or below -1e30.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linearize::{linearize, LinearizeError, Scheme, Tag, TagKind};
use crate::treebank::ParseTree;

/// File sentinel for minus infinity.
pub const NEG_INF_SENTINEL: f64 = -1e30;

/// Floor replacing minus infinity in perturbed tables. Far enough below the
/// zero-scored gold tags that mild noise leaves them winning, close enough
/// that heavy noise genuinely misleads the decoders.
pub const PERTURB_FLOOR: f64 = -10.0;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("tag `{0}` is not in the vocabulary")]
    UnknownTag(String),
    #[error("expected {expected} {what}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("noise stddev must be non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("missing weight for production `{0}`")]
    MissingProduction(String),
    #[error("non-positive weight {weight} for production `{production}`")]
    NonPositiveWeight { production: String, weight: f64 },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
}

/// Ordered tag vocabulary: both shifts first, then reduce tags per label in
/// sorted order, left direction before right.
#[derive(Debug, Clone, PartialEq)]
pub struct TagVocab {
    tags: Vec<Tag>,
    index: HashMap<Tag, usize>,
}

impl TagVocab {
    fn from_tags(tags: Vec<Tag>) -> TagVocab {
        let index = tags
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TagVocab { tags, index }
    }

    /// Vocabulary over the given nonterminal labels, closed under direction.
    pub fn with_labels<I, S>(labels: I) -> TagVocab
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        labels.dedup();
        let mut tags = vec![Tag::sl(), Tag::sr()];
        for label in labels {
            tags.push(Tag::rl(label.clone()));
            tags.push(Tag::rr(label));
        }
        TagVocab::from_tags(tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag(&self, index: usize) -> &Tag {
        &self.tags[index]
    }

    pub fn index_of(&self, tag: &Tag) -> Option<usize> {
        self.index.get(tag).copied()
    }
}

/// Collect the vocabulary of all tags in a corpus's linearizations, closed
/// so that every label carries both directions.
pub fn build_tag_vocab(trees: &[ParseTree], scheme: Scheme) -> Result<TagVocab, ScoreError> {
    if trees.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    let mut labels = Vec::new();
    for tree in trees {
        for tag in linearize(tree, scheme)?.tags {
            if tag.kind == TagKind::Reduce {
                labels.push(tag.label.expect("reduce tags carry labels"));
            }
        }
    }
    Ok(TagVocab::with_labels(labels))
}

/// How rule scores are factorized, mirroring the learner's design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DependencyMode {
    #[serde(rename = "independent")]
    Independent,
    #[serde(rename = "left")]
    LeftDep,
    #[serde(rename = "right")]
    RightDep,
}

impl fmt::Display for DependencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DependencyMode::Independent => "independent",
            DependencyMode::LeftDep => "left",
            DependencyMode::RightDep => "right",
        })
    }
}

/// Per-slot log-scores over a tag vocabulary, optionally with a tag-to-tag
/// transition table for the dependent modes.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub id: String,
    pub n: usize,
    pub scheme: Scheme,
    pub vocab: TagVocab,
    /// `(2N-1) x |T|` log-scores.
    pub log_scores: Vec<Vec<f64>>,
    /// `|T| x |T|` log-scores, row = previous tag.
    pub transition: Option<Vec<Vec<f64>>>,
    pub dependency: DependencyMode,
}

impl ScoreTable {
    pub fn slots(&self) -> usize {
        2 * self.n - 1
    }

    fn check_shape(&self) -> Result<(), ScoreError> {
        if self.log_scores.len() != self.slots() {
            return Err(ScoreError::DimensionMismatch {
                what: "score rows",
                expected: self.slots(),
                found: self.log_scores.len(),
            });
        }
        for row in &self.log_scores {
            if row.len() != self.vocab.len() {
                return Err(ScoreError::DimensionMismatch {
                    what: "row entries",
                    expected: self.vocab.len(),
                    found: row.len(),
                });
            }
        }
        match (&self.transition, self.dependency) {
            (None, DependencyMode::Independent) => Ok(()),
            (Some(matrix), DependencyMode::LeftDep | DependencyMode::RightDep) => {
                if matrix.len() != self.vocab.len()
                    || matrix.iter().any(|r| r.len() != self.vocab.len())
                {
                    return Err(ScoreError::DimensionMismatch {
                        what: "transition entries",
                        expected: self.vocab.len(),
                        found: matrix.iter().map(|r| r.len()).max().unwrap_or(0),
                    });
                }
                Ok(())
            }
            (Some(_), DependencyMode::Independent) => Err(ScoreError::DimensionMismatch {
                what: "transition rows (independent tables carry none)",
                expected: 0,
                found: self.vocab.len(),
            }),
            (None, _) => Err(ScoreError::DimensionMismatch {
                what: "transition rows",
                expected: self.vocab.len(),
                found: 0,
            }),
        }
    }
}

/// One-hot table in the log domain: zero at each gold tag, minus infinity
/// elsewhere. Decoding it recovers the gold tree.
pub fn oracle_scores(
    tree: &ParseTree,
    scheme: Scheme,
    vocab: &TagVocab,
) -> Result<ScoreTable, ScoreError> {
    let seq = linearize(tree, scheme)?;
    let mut log_scores = vec![vec![f64::NEG_INFINITY; vocab.len()]; seq.len()];
    for (slot, tag) in seq.tags.iter().enumerate() {
        let idx = vocab
            .index_of(tag)
            .ok_or_else(|| ScoreError::UnknownTag(tag.to_string()))?;
        log_scores[slot][idx] = 0.0;
    }
    Ok(ScoreTable {
        id: String::new(),
        n: seq.n,
        scheme,
        vocab: vocab.clone(),
        log_scores,
        transition: None,
        dependency: DependencyMode::Independent,
    })
}

/// Oracle scores with the minus infinities floored and i.i.d. Gaussian noise
/// added to every cell. Deterministic for a fixed seed and inputs.
pub fn perturbed_scores(
    tree: &ParseTree,
    scheme: Scheme,
    vocab: &TagVocab,
    sigma: f64,
    seed: u64,
) -> Result<ScoreTable, ScoreError> {
    if sigma < 0.0 {
        return Err(ScoreError::NegativeSigma(sigma));
    }
    let mut table = oracle_scores(tree, scheme, vocab)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma checked non-negative");
    for row in &mut table.log_scores {
        for cell in row.iter_mut() {
            let base = if cell.is_finite() { *cell } else { PERTURB_FLOOR };
            *cell = base + if sigma > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        }
    }
    Ok(table)
}

/// Log-score of a tag sequence: the sum of its per-slot scores, plus
/// transition scores between consecutive tags under the dependent modes.
pub fn sequence_log_prob(tags: &[Tag], table: &ScoreTable) -> Result<f64, ScoreError> {
    if tags.len() != table.log_scores.len() {
        return Err(ScoreError::DimensionMismatch {
            what: "tags",
            expected: table.log_scores.len(),
            found: tags.len(),
        });
    }
    let mut total = 0.0;
    let mut prev: Option<usize> = None;
    for (slot, tag) in tags.iter().enumerate() {
        let idx = table
            .vocab
            .index_of(tag)
            .ok_or_else(|| ScoreError::UnknownTag(tag.to_string()))?;
        total += table.log_scores[slot][idx];
        if let (Some(matrix), Some(p)) = (&table.transition, prev) {
            total += matrix[p][idx];
        }
        prev = Some(idx);
    }
    Ok(total)
}

/// A grammar production used as a weight key: parent over child symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub parent: String,
    pub children: Vec<String>,
}

impl Production {
    pub fn new(parent: impl Into<String>, children: Vec<String>) -> Production {
        Production { parent: parent.into(), children }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.parent)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

fn production_of(label: &str, children: &[ParseTree]) -> Production {
    Production::new(
        label,
        children.iter().map(|c| c.symbol().to_string()).collect(),
    )
}

/// Sum of log production weights over the interior nodes of a tree.
pub fn tree_log_score(
    tree: &ParseTree,
    weights: &HashMap<Production, f64>,
) -> Result<f64, ScoreError> {
    match tree {
        ParseTree::Node { label, children } => {
            let production = production_of(label, children);
            let weight = *weights
                .get(&production)
                .ok_or_else(|| ScoreError::MissingProduction(production.to_string()))?;
            if weight <= 0.0 {
                return Err(ScoreError::NonPositiveWeight {
                    production: production.to_string(),
                    weight,
                });
            }
            let mut total = weight.ln();
            for c in children {
                total += tree_log_score(c, weights)?;
            }
            Ok(total)
        }
        ParseTree::Leaf { .. } | ParseTree::Epsilon => Ok(0.0),
    }
}

#[derive(Serialize, Deserialize)]
struct ScoreRecord {
    id: String,
    n: usize,
    scheme: String,
    vocab: Vec<String>,
    log_scores: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transition: Option<Vec<Vec<f64>>>,
    dependency: DependencyMode,
}

fn encode_cell(v: f64) -> f64 {
    if v.is_finite() && v > NEG_INF_SENTINEL {
        v
    } else {
        NEG_INF_SENTINEL
    }
}

fn decode_cell(v: f64) -> f64 {
    if v <= NEG_INF_SENTINEL {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Serialize one table as a JSON line.
pub fn to_json_line(table: &ScoreTable) -> Result<String, ScoreError> {
    table.check_shape()?;
    let record = ScoreRecord {
        id: table.id.clone(),
        n: table.n,
        scheme: table.scheme.to_string(),
        vocab: table.vocab.tags().iter().map(|t| t.to_string()).collect(),
        log_scores: table
            .log_scores
            .iter()
            .map(|row| row.iter().map(|&v| encode_cell(v)).collect())
            .collect(),
        transition: table
            .transition
            .as_ref()
            .map(|m| m.iter().map(|row| row.iter().map(|&v| encode_cell(v)).collect()).collect()),
        dependency: table.dependency,
    };
    Ok(serde_json::to_string(&record).expect("score records serialize"))
}

/// Parse one JSON line into a table, validating the schema.
pub fn from_json_line(line: &str, line_no: usize) -> Result<ScoreTable, ScoreError> {
    let schema = |message: String| ScoreError::Schema { line: line_no, message };
    let record: ScoreRecord =
        serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
    let scheme: Scheme = record.scheme.parse().map_err(schema)?;
    let mut tags = Vec::with_capacity(record.vocab.len());
    for t in &record.vocab {
        tags.push(t.parse::<Tag>().map_err(|e| schema(e.to_string()))?);
    }
    let vocab = TagVocab::from_tags(tags);
    if vocab.len() != record.vocab.len() {
        return Err(schema("vocabulary contains duplicate tags".to_string()));
    }
    if record.n == 0 {
        return Err(schema("n must be at least 1".to_string()));
    }
    let table = ScoreTable {
        id: record.id,
        n: record.n,
        scheme,
        vocab,
        log_scores: record
            .log_scores
            .into_iter()
            .map(|row| row.into_iter().map(decode_cell).collect())
            .collect(),
        transition: record
            .transition
            .map(|m| m.into_iter().map(|row| row.into_iter().map(decode_cell).collect()).collect()),
        dependency: record.dependency,
    };
    table.check_shape().map_err(|e| schema(e.to_string()))?;
    Ok(table)
}

/// Read a JSON-lines score file.
pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreTable>, ScoreError> {
    let reader = BufReader::new(File::open(path)?);
    let mut tables = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        tables.push(from_json_line(&line, i + 1)?);
    }
    Ok(tables)
}

/// Write tables as a JSON-lines score file.
pub fn write_scores(tables: &[ScoreTable], path: impl AsRef<Path>) -> Result<(), ScoreError> {
    let mut out = File::create(path)?;
    for table in tables {
        writeln!(out, "{}", to_json_line(table)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_bracketed;

    fn running_example() -> ParseTree {
        parse_bracketed("(S (PRP She) (VP (V enjoys) (VP (V reading) (N papers))))")
            .unwrap()
            .remove(0)
    }

    #[test]
    fn vocab_of_the_running_example_closes_directions() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let rendered: Vec<String> = vocab.tags().iter().map(|t| t.to_string()).collect();
        assert_eq!(rendered, vec!["sl", "sr", "rl:S", "rr:S", "rl:VP", "rr:VP"]);
        assert_eq!(vocab.len(), 2 + 2 * 2);
        assert_eq!(vocab.index_of(&Tag::rl("VP")), Some(4));
    }

    #[test]
    fn empty_corpus_has_no_vocab() {
        assert!(matches!(
            build_tag_vocab(&[], Scheme::In),
            Err(ScoreError::EmptyCorpus)
        ));
    }

    #[test]
    fn oracle_scores_pick_out_the_gold_sequence() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let table = oracle_scores(&running_example(), Scheme::In, &vocab).unwrap();
        let gold = linearize(&running_example(), Scheme::In).unwrap();
        assert_eq!(sequence_log_prob(&gold.tags, &table).unwrap(), 0.0);
        // Any deviation from gold hits minus infinity.
        let mut other = gold.tags.clone();
        other[1] = Tag::rr("S");
        assert_eq!(
            sequence_log_prob(&other, &table).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn oracle_rejects_missing_vocab_entries() {
        let vocab = TagVocab::with_labels(["X"]);
        assert!(matches!(
            oracle_scores(&running_example(), Scheme::In, &vocab),
            Err(ScoreError::UnknownTag(_))
        ));
    }

    #[test]
    fn perturbed_scores_are_deterministic_per_seed() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let a = perturbed_scores(&running_example(), Scheme::In, &vocab, 2.5, 7).unwrap();
        let b = perturbed_scores(&running_example(), Scheme::In, &vocab, 2.5, 7).unwrap();
        assert_eq!(a.log_scores, b.log_scores);
        let c = perturbed_scores(&running_example(), Scheme::In, &vocab, 2.5, 8).unwrap();
        assert_ne!(a.log_scores, c.log_scores);
        assert!(matches!(
            perturbed_scores(&running_example(), Scheme::In, &vocab, -1.0, 7),
            Err(ScoreError::NegativeSigma(_))
        ));
    }

    #[test]
    fn zero_noise_keeps_the_gold_argmax() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let table = perturbed_scores(&running_example(), Scheme::In, &vocab, 0.0, 1).unwrap();
        let gold = linearize(&running_example(), Scheme::In).unwrap();
        assert_eq!(sequence_log_prob(&gold.tags, &table).unwrap(), 0.0);
    }

    #[test]
    fn uniform_scores_have_a_closed_form() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let n = 4;
        let uniform = (1.0 / vocab.len() as f64).ln();
        let table = ScoreTable {
            id: String::new(),
            n,
            scheme: Scheme::In,
            vocab: vocab.clone(),
            log_scores: vec![vec![uniform; vocab.len()]; 2 * n - 1],
            transition: None,
            dependency: DependencyMode::Independent,
        };
        let gold = linearize(&running_example(), Scheme::In).unwrap();
        let expected = (2 * n - 1) as f64 * uniform;
        assert!((sequence_log_prob(&gold.tags, &table).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn tree_log_score_multiplies_production_weights() {
        let mut weights = HashMap::new();
        weights.insert(
            Production::new("S", vec!["PRP".into(), "VP".into()]),
            0.5,
        );
        weights.insert(Production::new("VP", vec!["V".into(), "VP".into()]), 1.0);
        weights.insert(Production::new("VP", vec!["V".into(), "N".into()]), 1.0);
        let score = tree_log_score(&running_example(), &weights).unwrap();
        assert!((score - 0.5f64.ln()).abs() < 1e-12);

        let all_ones: HashMap<Production, f64> =
            weights.keys().cloned().map(|p| (p, 1.0)).collect();
        assert_eq!(tree_log_score(&running_example(), &all_ones).unwrap(), 0.0);

        weights.remove(&Production::new("VP", vec!["V".into(), "N".into()]));
        assert!(matches!(
            tree_log_score(&running_example(), &weights),
            Err(ScoreError::MissingProduction(_))
        ));
    }

    #[test]
    fn score_files_roundtrip() {
        let vocab = build_tag_vocab(&[running_example()], Scheme::In).unwrap();
        let oracle = oracle_scores(&running_example(), Scheme::In, &vocab).unwrap();
        let line = to_json_line(&oracle).unwrap();
        let back = from_json_line(&line, 1).unwrap();
        assert_eq!(back.n, oracle.n);
        assert_eq!(back.scheme, oracle.scheme);
        assert_eq!(back.log_scores, oracle.log_scores);
        assert_eq!(back.vocab.tags(), oracle.vocab.tags());
    }

    #[test]
    fn schema_violations_carry_the_line_number() {
        // Row width disagrees with the declared vocabulary.
        let bad = r#"{"id":"x","n":2,"scheme":"in","vocab":["sl","sr"],"log_scores":[[0.0],[0.0,0.0],[0.0,0.0]],"dependency":"independent"}"#;
        match from_json_line(bad, 3) {
            Err(ScoreError::Schema { line: 3, .. }) => {}
            other => panic!("expected schema error, got {other:?}"),
        }
        // Even row count cannot be 2N-1.
        let bad = r#"{"id":"x","n":2,"scheme":"in","vocab":["sl","sr"],"log_scores":[[0.0,0.0],[0.0,0.0]],"dependency":"independent"}"#;
        assert!(matches!(
            from_json_line(bad, 1),
            Err(ScoreError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn infinities_pass_through_the_sentinel() {
        let vocab = TagVocab::with_labels(["S"]);
        let table = ScoreTable {
            id: "t".into(),
            n: 1,
            scheme: Scheme::In,
            vocab,
            log_scores: vec![vec![0.25, f64::NEG_INFINITY, -1.5, -2e35]],
            transition: None,
            dependency: DependencyMode::Independent,
        };
        let back = from_json_line(&to_json_line(&table).unwrap(), 1).unwrap();
        assert_eq!(back.log_scores[0][0], 0.25);
        assert_eq!(back.log_scores[0][1], f64::NEG_INFINITY);
        assert_eq!(back.log_scores[0][2], -1.5);
        assert_eq!(back.log_scores[0][3], f64::NEG_INFINITY);
    }
}
