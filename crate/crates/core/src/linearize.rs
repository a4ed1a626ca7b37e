//! Tree linearization under pre-, post-, and in-order traversals, the stack
//! machines that rebuild trees from tags, and the map/merge bridges that
//! relate corner-transformed shift–reduce actions to in-order tags.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::transform::SlashLabel;
use crate::treebank::ParseTree;

/// Linearization scheme, i.e. the traversal order of the derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Pre,
    Post,
    In,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Pre, Scheme::Post, Scheme::In];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Pre => "pre",
            Scheme::Post => "post",
            Scheme::In => "in",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre" => Ok(Scheme::Pre),
            "post" => Ok(Scheme::Post),
            "in" => Ok(Scheme::In),
            other => Err(format!("unknown scheme `{other}` (expected pre, post, or in)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagKind {
    Shift,
    Reduce,
}

/// A single tag: shift or reduce, left or right child, with the reduced
/// nonterminal on reduce tags. Shift tags carry no label unless the caller
/// opts into encoding preterminals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub kind: TagKind,
    pub dir: Direction,
    pub label: Option<String>,
}

impl Tag {
    pub fn shift(dir: Direction) -> Tag {
        Tag { kind: TagKind::Shift, dir, label: None }
    }

    pub fn reduce(dir: Direction, label: impl Into<String>) -> Tag {
        Tag { kind: TagKind::Reduce, dir, label: Some(label.into()) }
    }

    pub fn sl() -> Tag {
        Tag::shift(Direction::Left)
    }

    pub fn sr() -> Tag {
        Tag::shift(Direction::Right)
    }

    pub fn rl(label: impl Into<String>) -> Tag {
        Tag::reduce(Direction::Left, label)
    }

    pub fn rr(label: impl Into<String>) -> Tag {
        Tag::reduce(Direction::Right, label)
    }

    pub fn is_shift(&self) -> bool {
        self.kind == TagKind::Shift
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match (self.kind, self.dir) {
            (TagKind::Shift, Direction::Left) => "sl",
            (TagKind::Shift, Direction::Right) => "sr",
            (TagKind::Reduce, Direction::Left) => "rl",
            (TagKind::Reduce, Direction::Right) => "rr",
        };
        match &self.label {
            Some(l) => write!(f, "{head}:{l}"),
            None => f.write_str(head),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse tag `{0}`")]
pub struct TagParseError(pub String);

impl FromStr for Tag {
    type Err = TagParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, label) = match s.split_once(':') {
            Some((h, l)) if !l.is_empty() => (h, Some(l.to_string())),
            Some(_) => return Err(TagParseError(s.to_string())),
            None => (s, None),
        };
        let (kind, dir) = match head {
            "sl" => (TagKind::Shift, Direction::Left),
            "sr" => (TagKind::Shift, Direction::Right),
            "rl" => (TagKind::Reduce, Direction::Left),
            "rr" => (TagKind::Reduce, Direction::Right),
            _ => return Err(TagParseError(s.to_string())),
        };
        if kind == TagKind::Reduce && label.is_none() {
            return Err(TagParseError(s.to_string()));
        }
        Ok(Tag { kind, dir, label })
    }
}

/// A linearized sentence: tags plus the sentence length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence {
    pub tags: Vec<Tag>,
    pub n: usize,
}

impl TagSequence {
    /// Wrap a tag list; the sentence length is the number of shifts.
    pub fn from_tags(tags: Vec<Tag>) -> TagSequence {
        let n = tags.iter().filter(|t| t.is_shift()).count();
        TagSequence { tags, n }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_tag_line(&self.tags))
    }
}

/// Render tags space-separated, e.g. `sl rl:S sl rr:VP sl rr:VP sr`.
pub fn format_tag_line(tags: &[Tag]) -> String {
    tags.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_tag_line(line: &str) -> Result<Vec<Tag>, TagParseError> {
    line.split_whitespace().map(|t| t.parse()).collect()
}

/// A shift–reduce action carrying its full production.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Shift {
        preterminal: String,
        word: String,
        dir: Direction,
    },
    Reduce {
        parent: String,
        left: ChildLabel,
        right: ChildLabel,
        dir: Direction,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChildLabel {
    Epsilon,
    Label(String),
}

impl ChildLabel {
    fn slash(&self) -> SlashLabel {
        match self {
            ChildLabel::Epsilon => SlashLabel::Epsilon,
            ChildLabel::Label(s) => SlashLabel::parse(s),
        }
    }
}

impl Action {
    /// Drop production detail, keep kind, direction, and reduce label.
    pub fn to_tag(&self) -> Tag {
        match self {
            Action::Shift { dir, .. } => Tag::shift(*dir),
            Action::Reduce { parent, dir, .. } => Tag::reduce(*dir, parent.clone()),
        }
    }
}

pub type ActionSequence = Vec<Action>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearizeError {
    #[error("tree is not strictly binary at node `{0}`")]
    NonBinary(String),
    #[error("tree has an empty yield")]
    EmptyYield,
}

fn child_label(tree: &ParseTree) -> ChildLabel {
    match tree {
        ParseTree::Epsilon => ChildLabel::Epsilon,
        other => ChildLabel::Label(other.symbol().to_string()),
    }
}

/// Enumerate shift–reduce actions in the given traversal order. Epsilon
/// leaves emit nothing; the root counts as a left child.
pub fn sr_actions(tree: &ParseTree, order: Scheme) -> Result<ActionSequence, LinearizeError> {
    let mut out = Vec::new();
    visit(tree, Direction::Left, order, &mut out)?;
    if out.is_empty() {
        return Err(LinearizeError::EmptyYield);
    }
    Ok(out)
}

fn visit(
    tree: &ParseTree,
    dir: Direction,
    order: Scheme,
    out: &mut Vec<Action>,
) -> Result<(), LinearizeError> {
    match tree {
        ParseTree::Epsilon => Ok(()),
        ParseTree::Leaf { preterminal, word } => {
            out.push(Action::Shift {
                preterminal: preterminal.clone(),
                word: word.clone(),
                dir,
            });
            Ok(())
        }
        ParseTree::Node { label, children } => {
            if children.len() != 2 {
                return Err(LinearizeError::NonBinary(label.clone()));
            }
            let reduce = Action::Reduce {
                parent: label.clone(),
                left: child_label(&children[0]),
                right: child_label(&children[1]),
                dir,
            };
            match order {
                Scheme::Pre => {
                    out.push(reduce);
                    visit(&children[0], Direction::Left, order, out)?;
                    visit(&children[1], Direction::Right, order, out)
                }
                Scheme::Post => {
                    visit(&children[0], Direction::Left, order, out)?;
                    visit(&children[1], Direction::Right, order, out)?;
                    out.push(reduce);
                    Ok(())
                }
                Scheme::In => {
                    visit(&children[0], Direction::Left, order, out)?;
                    out.push(reduce);
                    visit(&children[1], Direction::Right, order, out)
                }
            }
        }
    }
}

/// Linearize a binary tree into its tag sequence for the given scheme.
pub fn linearize(tree: &ParseTree, scheme: Scheme) -> Result<TagSequence, LinearizeError> {
    let actions = sr_actions(tree, scheme)?;
    Ok(TagSequence::from_tags(actions.iter().map(|a| a.to_tag()).collect()))
}

/// Like [`linearize`], but shift tags carry the preterminal, for pipelines
/// where part-of-speech tags are not given.
pub fn linearize_with_preterminals(
    tree: &ParseTree,
    scheme: Scheme,
) -> Result<TagSequence, LinearizeError> {
    let actions = sr_actions(tree, scheme)?;
    let tags = actions
        .iter()
        .map(|a| match a {
            Action::Shift { preterminal, dir, .. } => Tag {
                kind: TagKind::Shift,
                dir: *dir,
                label: Some(preterminal.clone()),
            },
            other => other.to_tag(),
        })
        .collect();
    Ok(TagSequence::from_tags(tags))
}

/// Why a tag sequence fails to encode a tree.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum Defect {
    #[error("stack underflow")]
    StackUnderflow,
    #[error("direction violates the scheme's discipline")]
    DirectionViolation,
    #[error("shift/reduce parity violated")]
    ParityViolation,
    #[error("sequence ends with an incomplete tree")]
    IncompleteTree,
    #[error("tag count does not match the leaf count")]
    LeafCountMismatch,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid tag sequence at position {position}: {defect}")]
pub struct InvalidTagSequence {
    /// 1-based tag position; one past the end for end-state defects.
    pub position: usize,
    pub defect: Defect,
}

/// Stack measure before any tag is consumed: the open root slot for
/// pre-order, an empty stack otherwise.
pub fn initial_measure(scheme: Scheme) -> usize {
    match scheme {
        Scheme::Pre => 1,
        Scheme::Post | Scheme::In => 0,
    }
}

/// Incremental validity simulation over the per-scheme stack measure.
///
/// Tracks exactly the state the decoders need: position, measure, and the
/// previous tag's kind and direction.
#[derive(Debug, Clone, Copy)]
pub struct StackSim {
    scheme: Scheme,
    pos: usize,
    measure: usize,
    prev: Option<(TagKind, Direction)>,
}

impl StackSim {
    pub fn new(scheme: Scheme) -> StackSim {
        StackSim {
            scheme,
            pos: 0,
            measure: initial_measure(scheme),
            prev: None,
        }
    }

    pub fn measure(&self) -> usize {
        self.measure
    }

    pub fn step(&mut self, kind: TagKind, dir: Direction) -> Result<(), Defect> {
        let pos = self.pos + 1;
        match self.scheme {
            Scheme::In => {
                let want_shift = pos % 2 == 1;
                if want_shift != (kind == TagKind::Shift) {
                    return Err(Defect::ParityViolation);
                }
                match (kind, dir) {
                    (TagKind::Shift, Direction::Left) => self.measure += 1,
                    (TagKind::Shift, Direction::Right) | (TagKind::Reduce, Direction::Left) => {
                        if self.measure < 1 {
                            return Err(Defect::StackUnderflow);
                        }
                    }
                    (TagKind::Reduce, Direction::Right) => {
                        if self.measure < 2 {
                            return Err(Defect::StackUnderflow);
                        }
                        self.measure -= 1;
                    }
                }
            }
            Scheme::Pre => {
                let want = match self.prev {
                    None | Some((TagKind::Reduce, _)) => Direction::Left,
                    Some((TagKind::Shift, _)) => Direction::Right,
                };
                if dir != want {
                    return Err(Defect::DirectionViolation);
                }
                if self.measure < 1 {
                    return Err(Defect::StackUnderflow);
                }
                match kind {
                    TagKind::Reduce => self.measure += 1,
                    TagKind::Shift => self.measure -= 1,
                }
            }
            Scheme::Post => {
                if let Some((_, prev_dir)) = self.prev {
                    let want_prev = if kind == TagKind::Reduce {
                        Direction::Right
                    } else {
                        Direction::Left
                    };
                    if prev_dir != want_prev {
                        return Err(Defect::DirectionViolation);
                    }
                }
                match kind {
                    TagKind::Shift => self.measure += 1,
                    TagKind::Reduce => {
                        if self.measure < 2 {
                            return Err(Defect::StackUnderflow);
                        }
                        self.measure -= 1;
                    }
                }
            }
        }
        self.pos = pos;
        self.prev = Some((kind, dir));
        Ok(())
    }

    pub fn finish(&self) -> Result<(), Defect> {
        match self.scheme {
            Scheme::In | Scheme::Post => {
                if self.measure != 1 {
                    return Err(Defect::IncompleteTree);
                }
            }
            Scheme::Pre => {
                if self.measure != 0 {
                    return Err(Defect::IncompleteTree);
                }
            }
        }
        if self.scheme == Scheme::Post {
            match self.prev {
                Some((_, Direction::Left)) => {}
                _ => return Err(Defect::DirectionViolation),
            }
        }
        if self.pos == 0 {
            return Err(Defect::IncompleteTree);
        }
        Ok(())
    }
}

/// Validity verdict plus the per-position stack measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    /// Measure after each consumed tag, up to the failure point.
    pub profile: Vec<usize>,
    pub failure: Option<InvalidTagSequence>,
}

/// Check whether a tag list encodes a tree under the scheme, reporting the
/// stack-measure profile either way.
pub fn check_validity(tags: &[Tag], scheme: Scheme) -> ValidityReport {
    let mut sim = StackSim::new(scheme);
    let mut profile = Vec::with_capacity(tags.len());
    for (i, tag) in tags.iter().enumerate() {
        if let Err(defect) = sim.step(tag.kind, tag.dir) {
            return ValidityReport {
                valid: false,
                profile,
                failure: Some(InvalidTagSequence { position: i + 1, defect }),
            };
        }
        profile.push(sim.measure());
    }
    match sim.finish() {
        Ok(()) => ValidityReport { valid: true, profile, failure: None },
        Err(defect) => ValidityReport {
            valid: false,
            profile,
            failure: Some(InvalidTagSequence { position: tags.len() + 1, defect }),
        },
    }
}

/// Rebuild the tree encoded by a tag sequence over the given leaves.
pub fn tags_to_tree(
    tags: &[Tag],
    leaves: &[(String, String)],
    scheme: Scheme,
) -> Result<ParseTree, InvalidTagSequence> {
    if tags.len().is_multiple_of(2) || leaves.len() != tags.len().div_ceil(2) {
        return Err(InvalidTagSequence {
            position: tags.len() + 1,
            defect: Defect::LeafCountMismatch,
        });
    }
    match scheme {
        Scheme::In => rebuild_in(tags, leaves),
        Scheme::Pre => rebuild_pre(tags, leaves),
        Scheme::Post => rebuild_post(tags, leaves),
    }
}

fn fail(position: usize, defect: Defect) -> InvalidTagSequence {
    InvalidTagSequence { position, defect }
}

/// Stack item of the in-order machine: a finished subtree, or a chain of
/// nodes each waiting for its right child (the hole sits at the innermost).
enum Item {
    Complete(ParseTree),
    Open(Vec<(String, ParseTree)>),
}

fn fill(frames: Vec<(String, ParseTree)>, mut tree: ParseTree) -> ParseTree {
    for (label, left) in frames.into_iter().rev() {
        tree = ParseTree::node(label, vec![left, tree]);
    }
    tree
}

fn rebuild_in(tags: &[Tag], leaves: &[(String, String)]) -> Result<ParseTree, InvalidTagSequence> {
    let mut sim = StackSim::new(Scheme::In);
    let mut stack: Vec<Item> = Vec::new();
    let mut next_leaf = leaves.iter();
    for (i, tag) in tags.iter().enumerate() {
        let pos = i + 1;
        sim.step(tag.kind, tag.dir).map_err(|d| fail(pos, d))?;
        match (tag.kind, tag.dir) {
            (TagKind::Shift, Direction::Left) => {
                let (p, w) = next_leaf.next().ok_or(fail(pos, Defect::LeafCountMismatch))?;
                stack.push(Item::Complete(ParseTree::leaf(p, w)));
            }
            (TagKind::Shift, Direction::Right) => {
                let (p, w) = next_leaf.next().ok_or(fail(pos, Defect::LeafCountMismatch))?;
                let top = stack.last_mut().expect("measure >= 1");
                let frames = match std::mem::replace(top, Item::Complete(ParseTree::Epsilon)) {
                    Item::Open(frames) => frames,
                    Item::Complete(_) => unreachable!("parity keeps open items on top"),
                };
                *top = Item::Complete(fill(frames, ParseTree::leaf(p, w)));
            }
            (TagKind::Reduce, dir) => {
                let label = tag.label.clone().unwrap_or_default();
                let t = match stack.pop().expect("measure >= 1") {
                    Item::Complete(t) => t,
                    Item::Open(_) => unreachable!("parity keeps complete items on top"),
                };
                match dir {
                    Direction::Left => stack.push(Item::Open(vec![(label, t)])),
                    Direction::Right => match stack.last_mut().expect("measure >= 2") {
                        Item::Open(frames) => frames.push((label, t)),
                        Item::Complete(_) => unreachable!("lower items are open"),
                    },
                }
            }
        }
    }
    sim.finish().map_err(|d| fail(tags.len() + 1, d))?;
    match (stack.pop(), stack.pop()) {
        (Some(Item::Complete(t)), None) => Ok(t),
        _ => Err(fail(tags.len() + 1, Defect::IncompleteTree)),
    }
}

fn rebuild_pre(tags: &[Tag], leaves: &[(String, String)]) -> Result<ParseTree, InvalidTagSequence> {
    let mut sim = StackSim::new(Scheme::Pre);
    let mut stack: Vec<(String, Vec<ParseTree>)> = Vec::new();
    let mut root: Option<ParseTree> = None;
    let mut next_leaf = leaves.iter();
    for (i, tag) in tags.iter().enumerate() {
        let pos = i + 1;
        sim.step(tag.kind, tag.dir).map_err(|d| fail(pos, d))?;
        match tag.kind {
            TagKind::Reduce => {
                stack.push((tag.label.clone().unwrap_or_default(), Vec::with_capacity(2)));
            }
            TagKind::Shift => {
                let (p, w) = next_leaf.next().ok_or(fail(pos, Defect::LeafCountMismatch))?;
                let mut t = ParseTree::leaf(p, w);
                loop {
                    match stack.last_mut() {
                        None => {
                            root = Some(t);
                            break;
                        }
                        Some((_, kids)) => {
                            kids.push(t);
                            if kids.len() == 2 {
                                let (label, kids) = stack.pop().unwrap();
                                t = ParseTree::node(label, kids);
                            } else {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    sim.finish().map_err(|d| fail(tags.len() + 1, d))?;
    match root {
        Some(t) if stack.is_empty() => Ok(t),
        _ => Err(fail(tags.len() + 1, Defect::IncompleteTree)),
    }
}

fn rebuild_post(tags: &[Tag], leaves: &[(String, String)]) -> Result<ParseTree, InvalidTagSequence> {
    let mut sim = StackSim::new(Scheme::Post);
    let mut stack: Vec<ParseTree> = Vec::new();
    let mut next_leaf = leaves.iter();
    for (i, tag) in tags.iter().enumerate() {
        let pos = i + 1;
        sim.step(tag.kind, tag.dir).map_err(|d| fail(pos, d))?;
        match tag.kind {
            TagKind::Shift => {
                let (p, w) = next_leaf.next().ok_or(fail(pos, Defect::LeafCountMismatch))?;
                stack.push(ParseTree::leaf(p, w));
            }
            TagKind::Reduce => {
                let right = stack.pop().expect("measure >= 2");
                let left = stack.pop().expect("measure >= 2");
                stack.push(ParseTree::node(
                    tag.label.clone().unwrap_or_default(),
                    vec![left, right],
                ));
            }
        }
    }
    sim.finish().map_err(|d| fail(tags.len() + 1, d))?;
    match (stack.pop(), stack.pop()) {
        (Some(t), None) => Ok(t),
        _ => Err(fail(tags.len() + 1, Defect::IncompleteTree)),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("action {index}: production has no corner-transform shape")]
    PlainRule { index: usize },
    #[error("mapped sequence is invalid: {0}")]
    InvalidResult(InvalidTagSequence),
    #[error("more than one reduce required a root flip")]
    MultipleRootFlips,
}

/// Map bottom-up actions over a right-corner tree onto tetratag candidates.
pub fn map_rc(actions: &[Action]) -> Result<Vec<Tag>, EquivalenceError> {
    actions
        .iter()
        .enumerate()
        .map(|(index, a)| match a {
            Action::Shift { .. } => Ok(Tag::sl()),
            Action::Reduce { parent, left, .. } => {
                match (SlashLabel::parse(parent), left.slash()) {
                    (SlashLabel::Slash { numerator, .. }, SlashLabel::Epsilon) => {
                        Ok(Tag::rl(numerator))
                    }
                    (SlashLabel::Slash { .. }, SlashLabel::Slash { denominator, .. }) => {
                        Ok(Tag::rr(denominator))
                    }
                    (SlashLabel::Plain(_), SlashLabel::Slash { .. }) => Ok(Tag::sr()),
                    _ => Err(EquivalenceError::PlainRule { index }),
                }
            }
        })
        .collect()
}

/// Merge each adjacent (`sl`, `sr`) pair into a single `sr`.
pub fn merge_rc(tags: &[Tag]) -> Vec<Tag> {
    merge_adjacent(tags, Tag::sr())
}

/// Merge each adjacent (`sl`, `sr`) pair into a single `sl`.
pub fn merge_lc(tags: &[Tag]) -> Vec<Tag> {
    merge_adjacent(tags, Tag::sl())
}

fn merge_adjacent(tags: &[Tag], replacement: Tag) -> Vec<Tag> {
    let mut out = Vec::with_capacity(tags.len());
    let mut i = 0;
    while i < tags.len() {
        if i + 1 < tags.len() && tags[i] == Tag::sl() && tags[i + 1] == Tag::sr() {
            out.push(replacement.clone());
            i += 2;
        } else {
            out.push(tags[i].clone());
            i += 1;
        }
    }
    out
}

/// Post-order actions over `right_corner(t)` mapped and merged into the
/// in-order tag sequence of `t`.
pub fn map_merge_rc(actions: &[Action]) -> Result<TagSequence, EquivalenceError> {
    let merged = merge_rc(&map_rc(actions)?);
    Ok(TagSequence::from_tags(merged))
}

/// Map top-down actions over a left-corner tree onto tetratag candidates.
pub fn map_lc(actions: &[Action]) -> Result<Vec<Tag>, EquivalenceError> {
    actions
        .iter()
        .enumerate()
        .map(|(index, a)| match a {
            Action::Shift { .. } => Ok(Tag::sr()),
            Action::Reduce { parent, right, .. } => {
                match (SlashLabel::parse(parent), right.slash()) {
                    (SlashLabel::Slash { numerator, .. }, SlashLabel::Epsilon) => {
                        Ok(Tag::rr(numerator))
                    }
                    (SlashLabel::Slash { .. }, SlashLabel::Slash { denominator, .. }) => {
                        Ok(Tag::rl(denominator))
                    }
                    (SlashLabel::Plain(_), SlashLabel::Slash { .. }) => Ok(Tag::sl()),
                    _ => Err(EquivalenceError::PlainRule { index }),
                }
            }
        })
        .collect()
}

/// Rewrite the unique right-child reduce sitting at in-order measure one to a
/// left-child reduce. The left-corner map rules tag the root as a right
/// child, which the in-order machine cannot accept.
fn normalize_lc_root(mut tags: Vec<Tag>) -> Result<Vec<Tag>, EquivalenceError> {
    if tags == [Tag::sr()] {
        return Ok(vec![Tag::sl()]);
    }
    let mut measure = 0usize;
    let mut flips = 0usize;
    for (i, tag) in tags.iter_mut().enumerate() {
        match (tag.kind, tag.dir) {
            (TagKind::Shift, Direction::Left) => measure += 1,
            (TagKind::Shift, Direction::Right) | (TagKind::Reduce, Direction::Left) => {
                if measure < 1 {
                    return Err(EquivalenceError::InvalidResult(fail(
                        i + 1,
                        Defect::StackUnderflow,
                    )));
                }
            }
            (TagKind::Reduce, Direction::Right) => {
                if measure >= 2 {
                    measure -= 1;
                } else if measure == 1 {
                    tag.dir = Direction::Left;
                    flips += 1;
                    if flips > 1 {
                        return Err(EquivalenceError::MultipleRootFlips);
                    }
                } else {
                    return Err(EquivalenceError::InvalidResult(fail(
                        i + 1,
                        Defect::StackUnderflow,
                    )));
                }
            }
        }
    }
    let report = check_validity(&tags, Scheme::In);
    match report.failure {
        None => Ok(tags),
        Some(f) => Err(EquivalenceError::InvalidResult(f)),
    }
}

/// Pre-order actions over `left_corner(t)` mapped, merged, and root-normalized
/// into the in-order tag sequence of `t`.
pub fn map_merge_lc(actions: &[Action]) -> Result<TagSequence, EquivalenceError> {
    let merged = merge_lc(&map_lc(actions)?);
    Ok(TagSequence::from_tags(normalize_lc_root(merged)?))
}
