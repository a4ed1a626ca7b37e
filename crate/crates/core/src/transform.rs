//! Right- and left-corner transformations of binary trees into slash-category
//! form.
//!
//! The right-corner transform rewrites every maximal right spine of a tree
//! into a left spine of incomplete categories `A/B`, anchored by an empty
//! `<eps>` leaf; the left-corner transform is its mirror image. Bottom-up
//! shift–reduce actions over the transformed tree relate the post-order and
//! in-order linearizations (see the `linearize` module).

use thiserror::Error;

use crate::treebank::{ParseTree, EPSILON_TOKEN};

/// A category label of a transformed tree: plain `A`, incomplete `A/B`, or
/// the empty placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlashLabel {
    Epsilon,
    Plain(String),
    Slash { numerator: String, denominator: String },
}

impl SlashLabel {
    /// Read a label string; splits at the first `/`.
    pub fn parse(label: &str) -> SlashLabel {
        if label == EPSILON_TOKEN {
            return SlashLabel::Epsilon;
        }
        match label.split_once('/') {
            Some((num, den)) => SlashLabel::Slash {
                numerator: num.to_string(),
                denominator: den.to_string(),
            },
            None => SlashLabel::Plain(label.to_string()),
        }
    }

    pub fn is_slashed(&self) -> bool {
        matches!(self, SlashLabel::Slash { .. })
    }

    pub fn numerator(&self) -> Option<&str> {
        match self {
            SlashLabel::Epsilon => None,
            SlashLabel::Plain(n) => Some(n),
            SlashLabel::Slash { numerator, .. } => Some(numerator),
        }
    }

    pub fn denominator(&self) -> Option<&str> {
        match self {
            SlashLabel::Slash { denominator, .. } => Some(denominator),
            _ => None,
        }
    }
}

impl std::fmt::Display for SlashLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlashLabel::Epsilon => f.write_str(EPSILON_TOKEN),
            SlashLabel::Plain(n) => f.write_str(n),
            SlashLabel::Slash { numerator, denominator } => {
                write!(f, "{numerator}/{denominator}")
            }
        }
    }
}

/// The local production shapes occurring in corner-transformed trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleShape {
    /// `A/B -> <eps> C` (or mirrored): the bottom of a spine.
    SpineStart,
    /// `A/B -> A/C D` (or mirrored): a spine continuation.
    SpineCont,
    /// `A -> A/B C` (or mirrored): the top of a spine.
    SpineTop,
    /// Anything else; transformed trees never contain these.
    Plain,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("tree is not strictly binary at node `{0}`")]
    NonBinary(String),
    #[error("label `{0}` already contains `/` or is the epsilon token")]
    ReservedLabel(String),
}

/// Classify a transformed production by the shapes of its labels alone.
pub fn classify_rule_shape(
    parent: &SlashLabel,
    left: &SlashLabel,
    right: &SlashLabel,
) -> RuleShape {
    if matches!(left, SlashLabel::Epsilon) || matches!(right, SlashLabel::Epsilon) {
        return RuleShape::SpineStart;
    }
    let child_slashed = left.is_slashed() || right.is_slashed();
    match (parent, child_slashed) {
        (SlashLabel::Slash { .. }, true) => RuleShape::SpineCont,
        (SlashLabel::Plain(_), true) => RuleShape::SpineTop,
        _ => RuleShape::Plain,
    }
}

fn check_labels(tree: &ParseTree) -> Result<(), TransformError> {
    match tree {
        ParseTree::Node { label, children } => {
            if label.contains('/') || label == EPSILON_TOKEN {
                return Err(TransformError::ReservedLabel(label.clone()));
            }
            if children.len() != 2 {
                return Err(TransformError::NonBinary(label.clone()));
            }
            children.iter().try_for_each(check_labels)
        }
        ParseTree::Leaf { preterminal, .. } => {
            if preterminal.contains('/') || preterminal == EPSILON_TOKEN {
                return Err(TransformError::ReservedLabel(preterminal.clone()));
            }
            Ok(())
        }
        ParseTree::Epsilon => Err(TransformError::ReservedLabel(EPSILON_TOKEN.to_string())),
    }
}

/// Right-corner transform of a strictly binary tree.
pub fn right_corner(tree: &ParseTree) -> Result<ParseTree, TransformError> {
    check_labels(tree)?;
    Ok(rc(tree))
}

fn rc(tree: &ParseTree) -> ParseTree {
    let (label, left, right) = match tree {
        ParseTree::Node { label, children } => (label, &children[0], &children[1]),
        _ => return tree.clone(),
    };
    // Walk the right spine X0=tree, X1, .., Xk (a leaf), collecting the left
    // child hanging off each spine node and the label of the node below it.
    let mut lefts = vec![left];
    let mut spine_labels = Vec::new();
    let mut node = right;
    loop {
        spine_labels.push(node.symbol().to_string());
        match node {
            ParseTree::Node { children, .. } => {
                lefts.push(&children[0]);
                node = &children[1];
            }
            _ => break,
        }
    }
    let mut acc = ParseTree::node(
        format!("{label}/{}", spine_labels[0]),
        vec![ParseTree::Epsilon, rc(lefts[0])],
    );
    for (i, l) in lefts.iter().enumerate().skip(1) {
        acc = ParseTree::node(format!("{label}/{}", spine_labels[i]), vec![acc, rc(l)]);
    }
    ParseTree::node(label.clone(), vec![acc, node.clone()])
}

/// Left-corner transform; the exact mirror of [`right_corner`].
pub fn left_corner(tree: &ParseTree) -> Result<ParseTree, TransformError> {
    check_labels(tree)?;
    Ok(lc(tree))
}

fn lc(tree: &ParseTree) -> ParseTree {
    let (label, left, right) = match tree {
        ParseTree::Node { label, children } => (label, &children[0], &children[1]),
        _ => return tree.clone(),
    };
    let mut rights = vec![right];
    let mut spine_labels = Vec::new();
    let mut node = left;
    loop {
        spine_labels.push(node.symbol().to_string());
        match node {
            ParseTree::Node { children, .. } => {
                rights.push(&children[1]);
                node = &children[0];
            }
            _ => break,
        }
    }
    let mut acc = ParseTree::node(
        format!("{label}/{}", spine_labels[0]),
        vec![lc(rights[0]), ParseTree::Epsilon],
    );
    for (i, r) in rights.iter().enumerate().skip(1) {
        acc = ParseTree::node(format!("{label}/{}", spine_labels[i]), vec![lc(r), acc]);
    }
    ParseTree::node(label.clone(), vec![node.clone(), acc])
}

/// Swap every node's children.
pub fn mirror(tree: &ParseTree) -> ParseTree {
    match tree {
        ParseTree::Node { label, children } => ParseTree::node(
            label.clone(),
            children.iter().rev().map(mirror).collect(),
        ),
        other => other.clone(),
    }
}

/// Words at non-epsilon leaves, left to right.
pub fn transformed_yield(tree: &ParseTree) -> Vec<&str> {
    tree.words()
}
