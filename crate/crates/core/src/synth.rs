//! Seeded generators for trees, chains, and score tables. Shared by the
//! property suites, the stress harness, and the demo.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use crate::linearize::Scheme;
use crate::score::{DependencyMode, ScoreTable, TagVocab};
use crate::treebank::ParseTree;

pub const LABELS: [&str; 5] = ["S", "NP", "VP", "PP", "ADJP"];
pub const PRETERMINALS: [&str; 5] = ["NN", "VB", "DT", "JJ", "RB"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn leaf(index: usize, rng: &mut StdRng) -> ParseTree {
    let pre = PRETERMINALS[rng.random_range(0..PRETERMINALS.len())];
    ParseTree::leaf(pre, format!("w{index}"))
}

fn random_label(rng: &mut StdRng) -> String {
    LABELS[rng.random_range(0..LABELS.len())].to_string()
}

/// Uniformly split a span of `n` words into a random binary tree.
pub fn random_binary_tree(rng: &mut StdRng, n: usize) -> ParseTree {
    fn build(rng: &mut StdRng, start: usize, n: usize) -> ParseTree {
        if n == 1 {
            return leaf(start, rng);
        }
        let split = rng.random_range(1..n);
        let left = build(rng, start, split);
        let right = build(rng, start + split, n - split);
        ParseTree::node(random_label(rng), vec![left, right])
    }
    build(rng, 1, n)
}

/// Random binary tree whose root is always labeled `S`.
pub fn random_binary_tree_rooted(rng: &mut StdRng, n: usize) -> ParseTree {
    match random_binary_tree(rng, n) {
        ParseTree::Node { children, .. } => ParseTree::node("S", children),
        leaf => leaf,
    }
}

/// Random n-ary tree with optional unary stretches, for the normalization
/// roundtrips. Depth and fanout stay within the given bounds; a node budget
/// keeps individual trees small.
pub fn random_nary_tree(rng: &mut StdRng, max_depth: usize, max_fanout: usize) -> ParseTree {
    random_nary_tree_sized(rng, max_depth, max_fanout, 200)
}

/// [`random_nary_tree`] with an explicit node budget.
pub fn random_nary_tree_sized(
    rng: &mut StdRng,
    max_depth: usize,
    max_fanout: usize,
    node_budget: usize,
) -> ParseTree {
    let mut next_word = 0usize;
    let mut budget = node_budget.max(1);
    fn build(
        rng: &mut StdRng,
        depth_left: usize,
        max_fanout: usize,
        next_word: &mut usize,
        budget: &mut usize,
    ) -> ParseTree {
        *budget = budget.saturating_sub(1);
        if depth_left == 0 || *budget == 0 || rng.random_range(0..3) == 0 {
            *next_word += 1;
            return leaf(*next_word, rng);
        }
        let fanout = rng.random_range(1..=max_fanout);
        let children = (0..fanout)
            .map(|_| build(rng, depth_left - 1, max_fanout, next_word, budget))
            .collect();
        ParseTree::node(random_label(rng), children)
    }
    build(
        rng,
        max_depth.max(1),
        max_fanout.max(1),
        &mut next_word,
        &mut budget,
    )
}

/// Fully left-branching chain over `n` words.
pub fn left_chain(n: usize) -> ParseTree {
    let mut t = ParseTree::leaf("NN", "w1");
    for i in 2..=n {
        t = ParseTree::node("S", vec![t, ParseTree::leaf("NN", format!("w{i}"))]);
    }
    t
}

/// Fully right-branching chain over `n` words.
pub fn right_chain(n: usize) -> ParseTree {
    let mut t = ParseTree::leaf("NN", format!("w{n}"));
    for i in (1..n).rev() {
        t = ParseTree::node("S", vec![ParseTree::leaf("NN", format!("w{i}")), t]);
    }
    t
}

/// Random tree whose splits lean right with probability `skew` (0 gives
/// left chains, 1 right chains, 0.5 uniform-ish).
pub fn skewed_tree(rng: &mut StdRng, n: usize, skew: f64) -> ParseTree {
    fn build(rng: &mut StdRng, start: usize, n: usize, skew: f64) -> ParseTree {
        if n == 1 {
            return leaf(start, rng);
        }
        let split = if rng.random_range(0.0..1.0) < skew { 1 } else { n - 1 };
        let left = build(rng, start, split, skew);
        let right = build(rng, start + split, n - split, skew);
        ParseTree::node(random_label(rng), vec![left, right])
    }
    build(rng, 1, n, skew)
}

/// Independent score table with i.i.d. standard-normal log-scores.
pub fn random_table(rng: &mut StdRng, scheme: Scheme, n: usize, vocab: &TagVocab) -> ScoreTable {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let log_scores = (0..2 * n - 1)
        .map(|_| (0..vocab.len()).map(|_| normal.sample(rng)).collect())
        .collect();
    ScoreTable {
        id: String::new(),
        n,
        scheme,
        vocab: vocab.clone(),
        log_scores,
        transition: None,
        dependency: DependencyMode::Independent,
    }
}

/// Dependent score table: random slots plus a random transition matrix.
pub fn random_dependent_table(
    rng: &mut StdRng,
    scheme: Scheme,
    n: usize,
    vocab: &TagVocab,
    dependency: DependencyMode,
) -> ScoreTable {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut table = random_table(rng, scheme, n, vocab);
    table.dependency = dependency;
    table.transition = Some(
        (0..vocab.len())
            .map(|_| (0..vocab.len()).map(|_| normal.sample(rng)).collect())
            .collect(),
    );
    table
}
