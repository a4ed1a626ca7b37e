//! Bracketed constituency trees: reading, writing, unary collapse, and
//! binarization.
//!
//! The text format is one S-expression per tree, `(LABEL child ...)`, where a
//! preterminal directly dominates its word: `(NN dogs)`. Corner-transformed
//! trees reuse the same format with `/` inside labels and the reserved token
//! `<eps>` for empty placeholder leaves.

use std::fmt;

use thiserror::Error;

/// Separator used by [`collapse_unaries`] unless the caller picks another.
pub const UNARY_SEPARATOR: &str = "+";

/// Opening marker of labels introduced by [`binarize`], e.g. `S|<B-C>`.
pub const BINARIZE_OPEN: &str = "|<";
/// Closing marker of binarization labels.
pub const BINARIZE_CLOSE: &str = ">";

/// Reserved token for the empty leaf produced by the corner transforms.
pub const EPSILON_TOKEN: &str = "<eps>";

/// A labeled ordered tree over words.
///
/// Interior nodes carry a nonterminal label; leaves pair a preterminal with a
/// word. `Epsilon` only appears in corner-transformed trees and is never
/// produced by the reader except for the literal `<eps>` token.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParseTree {
    Node {
        label: String,
        children: Vec<ParseTree>,
    },
    Leaf {
        preterminal: String,
        word: String,
    },
    Epsilon,
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(preterminal: impl Into<String>, word: impl Into<String>) -> Self {
        ParseTree::Leaf {
            preterminal: preterminal.into(),
            word: word.into(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, ParseTree::Leaf { .. })
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, ParseTree::Epsilon)
    }

    /// Label of an interior node, preterminal of a leaf, `<eps>` for epsilon.
    pub fn symbol(&self) -> &str {
        match self {
            ParseTree::Node { label, .. } => label,
            ParseTree::Leaf { preterminal, .. } => preterminal,
            ParseTree::Epsilon => EPSILON_TOKEN,
        }
    }

    /// The (preterminal, word) pairs at the leaves, left to right.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            ParseTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
            ParseTree::Leaf { preterminal, word } => out.push((preterminal, word)),
            ParseTree::Epsilon => {}
        }
    }

    /// Number of words in the yield. Epsilon leaves do not count.
    pub fn yield_len(&self) -> usize {
        match self {
            ParseTree::Node { children, .. } => children.iter().map(|c| c.yield_len()).sum(),
            ParseTree::Leaf { .. } => 1,
            ParseTree::Epsilon => 0,
        }
    }

    /// The words of the yield, left to right.
    pub fn words(&self) -> Vec<&str> {
        self.leaves().into_iter().map(|(_, w)| w).collect()
    }

    /// True when every interior node has exactly two children.
    pub fn is_strictly_binary(&self) -> bool {
        match self {
            ParseTree::Node { children, .. } => {
                children.len() == 2 && children.iter().all(|c| c.is_strictly_binary())
            }
            ParseTree::Leaf { .. } | ParseTree::Epsilon => true,
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bracketed(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: unbalanced parenthesis")]
    Unbalanced { line: usize, col: usize },
    #[error("line {line}, column {col}: expected a node label")]
    MissingLabel { line: usize, col: usize },
    #[error("line {line}, column {col}: node has no children")]
    EmptyNode { line: usize, col: usize },
    #[error("line {line}, column {col}: word `{word}` has no preterminal above it")]
    BareWord {
        line: usize,
        col: usize,
        word: String,
    },
    #[error("input contains no tree")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("label `{0}` already contains the unary separator `{1}`")]
    SeparatorInLabel(String, String),
    #[error("binarization marker at the root: `{0}`")]
    MarkerAtRoot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Symbol(String),
}

struct Lexer<'a> {
    chars: std::str::Chars<'a>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars(),
            line: 1,
            col: 0,
        }
    }

    fn tokens(mut self) -> Vec<(Token, usize, usize)> {
        let mut out = Vec::new();
        let mut pending = String::new();
        let mut start = (1, 1);
        loop {
            let c = self.chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    self.line += 1;
                    self.col = 0;
                } else {
                    self.col += 1;
                }
            }
            match c {
                Some('(') | Some(')') | None => {
                    if !pending.is_empty() {
                        out.push((Token::Symbol(std::mem::take(&mut pending)), start.0, start.1));
                    }
                    match c {
                        Some('(') => out.push((Token::Open, self.line, self.col)),
                        Some(')') => out.push((Token::Close, self.line, self.col)),
                        None => break,
                        _ => unreachable!(),
                    }
                }
                Some(c) if c.is_whitespace() => {
                    if !pending.is_empty() {
                        out.push((Token::Symbol(std::mem::take(&mut pending)), start.0, start.1));
                    }
                }
                Some(c) => {
                    if pending.is_empty() {
                        start = (self.line, self.col);
                    }
                    pending.push(c);
                }
            }
        }
        out
    }
}

fn unescape_word(word: &str) -> String {
    word.replace("-LRB-", "(").replace("-RRB-", ")")
}

fn escape_word(word: &str) -> String {
    word.replace('(', "-LRB-").replace(')', "-RRB-")
}

/// Parse a sequence of bracketed trees.
///
/// Preterminals are the innermost labels directly above a word; `-LRB-` and
/// `-RRB-` in words are unescaped to parentheses.
pub fn parse_bracketed(text: &str) -> Result<Vec<ParseTree>, ParseError> {
    let tokens = Lexer::new(text).tokens();
    let mut trees = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        match &tokens[pos] {
            (Token::Open, _, _) => {
                let (tree, next) = parse_node(&tokens, pos)?;
                trees.push(tree);
                pos = next;
            }
            (Token::Close, line, col) => {
                return Err(ParseError::Unbalanced {
                    line: *line,
                    col: *col,
                })
            }
            (Token::Symbol(s), line, col) => {
                return Err(ParseError::BareWord {
                    line: *line,
                    col: *col,
                    word: s.clone(),
                })
            }
        }
    }
    if trees.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(trees)
}

/// Child item seen while a node's children are collected.
enum RawChild {
    Tree(ParseTree),
    Word { word: String, line: usize, col: usize },
}

fn parse_node(
    tokens: &[(Token, usize, usize)],
    open: usize,
) -> Result<(ParseTree, usize), ParseError> {
    let (_, open_line, open_col) = tokens[open];
    let mut pos = open + 1;
    let label = match tokens.get(pos) {
        Some((Token::Symbol(s), _, _)) => {
            pos += 1;
            s.clone()
        }
        Some((_, line, col)) => {
            return Err(ParseError::MissingLabel {
                line: *line,
                col: *col,
            })
        }
        None => {
            return Err(ParseError::Unbalanced {
                line: open_line,
                col: open_col,
            })
        }
    };
    let mut raw = Vec::new();
    loop {
        match tokens.get(pos) {
            Some((Token::Open, _, _)) => {
                let (child, next) = parse_node(tokens, pos)?;
                raw.push(RawChild::Tree(child));
                pos = next;
            }
            Some((Token::Symbol(s), line, col)) => {
                if s == EPSILON_TOKEN {
                    raw.push(RawChild::Tree(ParseTree::Epsilon));
                } else {
                    raw.push(RawChild::Word {
                        word: s.clone(),
                        line: *line,
                        col: *col,
                    });
                }
                pos += 1;
            }
            Some((Token::Close, line, col)) => {
                if raw.is_empty() {
                    return Err(ParseError::EmptyNode {
                        line: *line,
                        col: *col,
                    });
                }
                pos += 1;
                break;
            }
            None => {
                return Err(ParseError::Unbalanced {
                    line: open_line,
                    col: open_col,
                })
            }
        }
    }
    // One bare word under a label is a leaf; a bare word next to siblings has
    // no preterminal of its own.
    if raw.len() == 1 {
        if let RawChild::Word { word, .. } = &raw[0] {
            return Ok((ParseTree::leaf(label, unescape_word(word)), pos));
        }
    }
    let mut children = Vec::with_capacity(raw.len());
    for item in raw {
        match item {
            RawChild::Tree(t) => children.push(t),
            RawChild::Word { word, line, col } => {
                return Err(ParseError::BareWord { line, col, word })
            }
        }
    }
    Ok((ParseTree::node(label, children), pos))
}

/// Render a tree in bracketed form with single spaces between tokens.
pub fn format_bracketed(tree: &ParseTree) -> String {
    let mut out = String::new();
    write_tree(tree, &mut out);
    out
}

fn write_tree(tree: &ParseTree, out: &mut String) {
    match tree {
        ParseTree::Node { label, children } => {
            out.push('(');
            out.push_str(label);
            for c in children {
                out.push(' ');
                write_tree(c, out);
            }
            out.push(')');
        }
        ParseTree::Leaf { preterminal, word } => {
            out.push('(');
            out.push_str(preterminal);
            out.push(' ');
            out.push_str(&escape_word(word));
            out.push(')');
        }
        ParseTree::Epsilon => out.push_str(EPSILON_TOKEN),
    }
}

fn check_separator_free(tree: &ParseTree, separator: &str) -> Result<(), NormalizeError> {
    match tree {
        ParseTree::Node { label, children } => {
            if label.contains(separator) {
                return Err(NormalizeError::SeparatorInLabel(
                    label.clone(),
                    separator.to_string(),
                ));
            }
            children.iter().try_for_each(|c| check_separator_free(c, separator))
        }
        ParseTree::Leaf { preterminal, .. } => {
            if preterminal.contains(separator) {
                return Err(NormalizeError::SeparatorInLabel(
                    preterminal.clone(),
                    separator.to_string(),
                ));
            }
            Ok(())
        }
        ParseTree::Epsilon => Ok(()),
    }
}

/// Collapse unary chains by joining labels with `separator`.
///
/// A chain ending at a preterminal folds into the preterminal, so
/// `(S (NP (N dogs)))` becomes the single leaf `(S+NP+N dogs)`.
pub fn collapse_unaries(tree: ParseTree, separator: &str) -> Result<ParseTree, NormalizeError> {
    check_separator_free(&tree, separator)?;
    Ok(collapse_rec(tree, separator))
}

fn collapse_rec(tree: ParseTree, sep: &str) -> ParseTree {
    match tree {
        ParseTree::Node { label, mut children } => {
            if children.len() == 1 {
                let child = collapse_rec(children.pop().unwrap(), sep);
                match child {
                    ParseTree::Leaf { preterminal, word } => {
                        ParseTree::leaf(format!("{label}{sep}{preterminal}"), word)
                    }
                    ParseTree::Node {
                        label: inner,
                        children,
                    } => ParseTree::node(format!("{label}{sep}{inner}"), children),
                    ParseTree::Epsilon => ParseTree::node(label, vec![ParseTree::Epsilon]),
                }
            } else {
                ParseTree::node(
                    label,
                    children.into_iter().map(|c| collapse_rec(c, sep)).collect(),
                )
            }
        }
        other => other,
    }
}

/// Undo [`collapse_unaries`]: split labels on `separator` back into chains.
pub fn expand_unaries(tree: ParseTree, separator: &str) -> ParseTree {
    match tree {
        ParseTree::Node { label, children } => {
            let children: Vec<_> = children
                .into_iter()
                .map(|c| expand_unaries(c, separator))
                .collect();
            let parts: Vec<&str> = label.split(separator).collect();
            let (innermost, outer) = parts.split_last().unwrap();
            let mut tree = ParseTree::node(*innermost, children);
            for part in outer.iter().rev() {
                tree = ParseTree::node(*part, vec![tree]);
            }
            tree
        }
        ParseTree::Leaf { preterminal, word } => {
            let parts: Vec<&str> = preterminal.split(separator).collect();
            let (innermost, outer) = parts.split_last().unwrap();
            let mut tree = ParseTree::leaf(*innermost, word);
            for part in outer.iter().rev() {
                tree = ParseTree::node(*part, vec![tree]);
            }
            tree
        }
        ParseTree::Epsilon => ParseTree::Epsilon,
    }
}

/// Right-factored binarization. Nodes with more than two children get
/// intermediate right children labeled `P|<c1-c2-...>` over the remaining
/// siblings.
pub fn binarize(tree: ParseTree) -> ParseTree {
    match tree {
        ParseTree::Node { label, children } => {
            let mut children: Vec<_> = children.into_iter().map(binarize).collect();
            if children.len() <= 2 {
                return ParseTree::node(label, children);
            }
            let first = children.remove(0);
            let rest = binarize_rest(&label, children);
            ParseTree::node(label, vec![first, rest])
        }
        other => other,
    }
}

fn binarize_rest(parent: &str, mut rest: Vec<ParseTree>) -> ParseTree {
    let symbols: Vec<&str> = rest.iter().map(|c| c.symbol()).collect();
    let label = format!(
        "{parent}{BINARIZE_OPEN}{}{BINARIZE_CLOSE}",
        symbols.join("-")
    );
    if rest.len() == 2 {
        ParseTree::node(label, rest)
    } else {
        let first = rest.remove(0);
        let inner = binarize_rest(parent, rest);
        ParseTree::node(label, vec![first, inner])
    }
}

/// True for labels introduced by [`binarize`].
pub fn is_binarize_label(label: &str) -> bool {
    label.contains(BINARIZE_OPEN) && label.ends_with(BINARIZE_CLOSE)
}

/// Splice out all intermediate nodes introduced by [`binarize`], hoisting
/// their children in order.
pub fn debinarize(tree: ParseTree) -> Result<ParseTree, NormalizeError> {
    if let ParseTree::Node { label, .. } = &tree {
        if is_binarize_label(label) {
            return Err(NormalizeError::MarkerAtRoot(label.clone()));
        }
    }
    Ok(debinarize_rec(tree))
}

fn debinarize_rec(tree: ParseTree) -> ParseTree {
    match tree {
        ParseTree::Node { label, children } => {
            let mut flat = Vec::with_capacity(children.len());
            for c in children {
                let c = debinarize_rec(c);
                match c {
                    ParseTree::Node {
                        label: ref l,
                        children: _,
                    } if is_binarize_label(l) => {
                        if let ParseTree::Node { children, .. } = c {
                            flat.extend(children);
                        }
                    }
                    other => flat.push(other),
                }
            }
            ParseTree::node(label, flat)
        }
        other => other,
    }
}
