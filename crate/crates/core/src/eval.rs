//! Bracket precision/recall/F1 in the style of the evalb script, stack-depth
//! statistics, and correlation.
//!
//! Defaults: punctuation kept, no label equivalences, the root bracket
//! counted, preterminal spans excluded. All four knobs are configurable.
//! Inputs are expected in denormalized form (markers spliced out, collapsed
//! unaries expanded).

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::linearize::{check_validity, initial_measure, linearize, LinearizeError, Scheme};
use crate::treebank::ParseTree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("yield lengths differ: gold {gold}, predicted {pred}")]
    YieldMismatch { gold: usize, pred: usize },
    #[error("corpora differ in length: gold {gold}, predicted {pred}")]
    CorpusMismatch { gold: usize, pred: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("need at least {0} paired observations")]
    TooFewPoints(usize),
    #[error("inputs have zero variance")]
    DegenerateVariance,
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
}

/// evalb-style matching parameters.
#[derive(Debug, Clone)]
pub struct EvalbConfig {
    pub include_root: bool,
    pub include_preterminals: bool,
    pub delete_punctuation: bool,
    /// Preterminals treated as punctuation when deletion is on.
    pub punctuation_tags: Vec<String>,
    /// Label pairs treated as equal; each right side maps onto the left.
    pub label_equivalences: Vec<(String, String)>,
}

impl Default for EvalbConfig {
    fn default() -> Self {
        EvalbConfig {
            include_root: true,
            include_preterminals: false,
            delete_punctuation: false,
            punctuation_tags: ["``", "''", ".", ",", ":", "-NONE-"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            label_equivalences: Vec::new(),
        }
    }
}

impl EvalbConfig {
    fn canonical(&self, label: &str) -> String {
        for (keep, alias) in &self.label_equivalences {
            if label == alias {
                return keep.clone();
            }
        }
        label.to_string()
    }
}

/// Labeled spans over word positions, as a sorted multiset.
pub type BracketSet = Vec<(String, usize, usize)>;

/// Extract the labeled bracket multiset of a tree under the config.
pub fn bracket_multiset(tree: &ParseTree, config: &EvalbConfig) -> BracketSet {
    // Positions are assigned after punctuation deletion, matching evalb.
    let keep: Vec<bool> = tree
        .leaves()
        .iter()
        .map(|(p, _)| {
            !(config.delete_punctuation && config.punctuation_tags.iter().any(|t| t == p))
        })
        .collect();
    let mut positions = Vec::with_capacity(keep.len());
    let mut next = 0usize;
    for &k in &keep {
        if k {
            next += 1;
            positions.push(Some(next));
        } else {
            positions.push(None);
        }
    }
    let mut brackets = Vec::new();
    let mut cursor = 0usize;
    collect_spans(tree, config, &positions, &mut cursor, true, &mut brackets);
    brackets.sort();
    brackets
}

fn collect_spans(
    tree: &ParseTree,
    config: &EvalbConfig,
    positions: &[Option<usize>],
    cursor: &mut usize,
    is_root: bool,
    out: &mut BracketSet,
) -> Option<(usize, usize)> {
    match tree {
        ParseTree::Leaf { preterminal, .. } => {
            let pos = positions[*cursor];
            *cursor += 1;
            let (start, end) = (pos?, pos?);
            if config.include_preterminals {
                out.push((config.canonical(preterminal), start, end));
            }
            Some((start, end))
        }
        ParseTree::Epsilon => None,
        ParseTree::Node { label, children } => {
            let mut span: Option<(usize, usize)> = None;
            for c in children {
                if let Some((s, e)) = collect_spans(c, config, positions, cursor, false, out) {
                    span = Some(match span {
                        None => (s, e),
                        Some((s0, _)) => (s0, e),
                    });
                }
            }
            let (start, end) = span?;
            if !is_root || config.include_root {
                out.push((config.canonical(label), start, end));
            }
            Some((start, end))
        }
    }
}

fn multiset_intersection(a: &BracketSet, b: &BracketSet) -> usize {
    // Both sides arrive sorted.
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                matched += 1;
                i += 1;
                j += 1;
            }
        }
    }
    matched
}

fn prf(matched: usize, pred: usize, gold: usize) -> (f64, f64, f64) {
    if pred == 0 && gold == 0 {
        return (100.0, 100.0, 100.0);
    }
    let p = if pred > 0 { 100.0 * matched as f64 / pred as f64 } else { 0.0 };
    let r = if gold > 0 { 100.0 * matched as f64 / gold as f64 } else { 0.0 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

/// Labeled bracket precision, recall, and F1 of one tree pair, as
/// percentages.
pub fn bracket_prf(
    gold: &ParseTree,
    pred: &ParseTree,
    config: &EvalbConfig,
) -> Result<(f64, f64, f64), EvalError> {
    if gold.yield_len() != pred.yield_len() {
        return Err(EvalError::YieldMismatch {
            gold: gold.yield_len(),
            pred: pred.yield_len(),
        });
    }
    let g = bracket_multiset(gold, config);
    let p = bracket_multiset(pred, config);
    let matched = multiset_intersection(&g, &p);
    Ok(prf(matched, p.len(), g.len()))
}

/// Micro-averaged corpus precision, recall, and F1: counts are summed over
/// sentences before dividing.
pub fn corpus_prf(
    gold: &[ParseTree],
    pred: &[ParseTree],
    config: &EvalbConfig,
) -> Result<(f64, f64, f64), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::CorpusMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let (mut matched, mut pred_total, mut gold_total) = (0usize, 0usize, 0usize);
    for (g, p) in gold.iter().zip(pred) {
        if g.yield_len() != p.yield_len() {
            return Err(EvalError::YieldMismatch {
                gold: g.yield_len(),
                pred: p.yield_len(),
            });
        }
        let gb = bracket_multiset(g, config);
        let pb = bracket_multiset(p, config);
        matched += multiset_intersection(&gb, &pb);
        pred_total += pb.len();
        gold_total += gb.len();
    }
    Ok(prf(matched, pred_total, gold_total))
}

/// Round a percentage to two decimals, half away from zero.
pub fn round2(x: f64) -> f64 {
    (x * 100.0 + 0.5).floor() / 100.0
}

/// Per-sentence TSV report with a trailing summary row.
pub fn corpus_report(
    gold: &[ParseTree],
    pred: &[ParseTree],
    config: &EvalbConfig,
) -> Result<String, EvalError> {
    let mut out = String::from("sentence_id\tprecision\trecall\tf1\n");
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        let (pr, rc, f1) = bracket_prf(g, p, config)?;
        out.push_str(&format!(
            "{}\t{:.2}\t{:.2}\t{:.2}\n",
            i + 1,
            round2(pr),
            round2(rc),
            round2(f1)
        ));
    }
    let (pr, rc, f1) = corpus_prf(gold, pred, config)?;
    out.push_str(&format!(
        "all\t{:.2}\t{:.2}\t{:.2}\n",
        round2(pr),
        round2(rc),
        round2(f1)
    ));
    Ok(out)
}

/// Largest stack measure reached while linearizing the tree, including the
/// initial measure.
pub fn required_stack_depth(tree: &ParseTree, scheme: Scheme) -> Result<usize, EvalError> {
    let seq = linearize(tree, scheme)?;
    let report = check_validity(&seq.tags, scheme);
    let peak = report.profile.iter().copied().max().unwrap_or(0);
    Ok(peak.max(initial_measure(scheme)))
}

/// Largest required stack depth over a corpus; the usual decoder default.
pub fn corpus_max_stack(trees: &[ParseTree], scheme: Scheme) -> Result<usize, EvalError> {
    if trees.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut depth = 1;
    for t in trees {
        depth = depth.max(required_stack_depth(t, scheme)?);
    }
    Ok(depth)
}

/// Fraction of trees linearizable within each stack bound, from depth one up
/// to the corpus maximum. Monotone and ending at one.
pub fn coverage_curve(
    trees: &[ParseTree],
    scheme: Scheme,
) -> Result<Vec<(usize, f64)>, EvalError> {
    if trees.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let depths: Vec<usize> = trees
        .iter()
        .map(|t| required_stack_depth(t, scheme))
        .collect::<Result<_, _>>()?;
    let max_depth = depths.iter().copied().max().unwrap_or(1);
    let total = depths.len() as f64;
    let mut curve = Vec::with_capacity(max_depth);
    for d in 1..=max_depth {
        let covered = depths.iter().filter(|&&x| x <= d).count() as f64;
        curve.push((d, covered / total));
    }
    Ok(curve)
}

/// Pearson product-moment correlation with a two-sided p-value from the
/// t-distribution with n-2 degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::CorpusMismatch {
            gold: xs.len(),
            pred: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(EvalError::TooFewPoints(3));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(EvalError::DegenerateVariance);
    }
    let r = cov / (var_x.sqrt() * var_y.sqrt());
    let r = r.clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p = if 1.0 - r * r <= f64::EPSILON {
        0.0
    } else {
        let t = r.abs() * (dof / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).expect("dof >= 1");
        2.0 * (1.0 - dist.cdf(t))
    };
    Ok((r, p))
}

/// Convenience: mean word-level deviation against parser F1, for the
/// deviation/accuracy correlation analysis.
pub fn deviation_accuracy_correlation(
    mean_deviations: &[f64],
    f_measures: &[f64],
) -> Result<(f64, f64), EvalError> {
    pearson(mean_deviations, f_measures)
}
