//! Decoders that map score tables to the highest-scoring valid tag sequence:
//! exact dynamic programs over the per-scheme decoding DAG, beam search, and
//! an exhaustive oracle for small instances.
//!
//! DAG nodes are (position, stack measure) pairs plus whatever the scheme
//! needs to remember about the previous tag. Charts run in the max-plus
//! semiring; ties break toward the lexicographically smallest sequence of
//! vocabulary indices, shared by all three decoders.

use std::collections::HashMap;

use thiserror::Error;

use crate::linearize::{
    initial_measure, Direction, Scheme, StackSim, Tag, TagKind, TagSequence,
};
use crate::score::{sequence_log_prob, DependencyMode, ScoreError, ScoreTable};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("no valid tag sequence within stack bound {d}")]
    NoValidPath { d: usize },
    #[error("dependency mode `{mode}` cannot pair with scheme `{scheme}`")]
    IllegalPairing { scheme: Scheme, mode: DependencyMode },
    #[error("decoder configured for `{expected}` but table carries `{found}`")]
    SchemeMismatch { expected: Scheme, found: Scheme },
    #[error("table dependency `{0}` does not match the decoder")]
    WrongMode(DependencyMode),
    #[error("brute-force guard exceeded: n={n}, |T|={vocab} (limits: n <= 5, |T| <= 8)")]
    GuardExceeded { n: usize, vocab: usize },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Deterministic tie-breaking rule shared by all decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Prefer the lexicographically smallest sequence of vocabulary indices.
    #[default]
    LexSmallestTagIndex,
}

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    pub scheme: Scheme,
    pub dependency: DependencyMode,
    /// Largest admissible stack measure `d`.
    pub max_stack: usize,
    /// Beam width `h`; only [`beam_decode`] reads it.
    pub beam_size: usize,
    pub tie_break: TieBreak,
}

impl DecoderConfig {
    pub fn dp(scheme: Scheme, max_stack: usize) -> DecoderConfig {
        DecoderConfig {
            scheme,
            dependency: DependencyMode::Independent,
            max_stack: max_stack.max(1),
            beam_size: 1,
            tie_break: TieBreak::default(),
        }
    }

    pub fn dependent(scheme: Scheme, dependency: DependencyMode, max_stack: usize) -> DecoderConfig {
        DecoderConfig {
            dependency,
            ..DecoderConfig::dp(scheme, max_stack)
        }
    }

    pub fn beam(scheme: Scheme, max_stack: usize, beam_size: usize) -> DecoderConfig {
        DecoderConfig {
            beam_size: beam_size.max(1),
            ..DecoderConfig::dp(scheme, max_stack)
        }
    }
}

/// A decoding DAG node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderState {
    /// Number of tags generated so far.
    pub pos: usize,
    /// Stack measure after those tags.
    pub stack: usize,
    /// Kind and direction of the previous tag, if any.
    pub prev: Option<(TagKind, Direction)>,
}

impl DecoderState {
    pub fn start(scheme: Scheme) -> DecoderState {
        DecoderState {
            pos: 0,
            stack: initial_measure(scheme),
            prev: None,
        }
    }
}

/// Measure after consuming `(kind, dir)` as tag number `pos_new`, or `None`
/// when the scheme's constraints reject the edge.
fn step_measure(
    scheme: Scheme,
    pos_new: usize,
    stack: usize,
    prev: Option<(TagKind, Direction)>,
    kind: TagKind,
    dir: Direction,
) -> Option<usize> {
    match scheme {
        Scheme::In => {
            // Odd tags shift, even tags reduce.
            if (pos_new % 2 == 1) != (kind == TagKind::Shift) {
                return None;
            }
            match (kind, dir) {
                (TagKind::Shift, Direction::Left) => Some(stack + 1),
                (TagKind::Shift, Direction::Right) if stack >= 1 => Some(stack),
                (TagKind::Reduce, Direction::Left) if stack >= 1 => Some(stack),
                (TagKind::Reduce, Direction::Right) if stack >= 2 => Some(stack - 1),
                _ => None,
            }
        }
        Scheme::Pre => {
            // Right children only directly after a shift.
            let want = match prev {
                None | Some((TagKind::Reduce, _)) => Direction::Left,
                Some((TagKind::Shift, _)) => Direction::Right,
            };
            if dir != want || stack < 1 {
                return None;
            }
            match kind {
                TagKind::Reduce => Some(stack + 1),
                TagKind::Shift => Some(stack - 1),
            }
        }
        Scheme::Post => {
            // A tag is a right child exactly when the next tag reduces it.
            if let Some((_, prev_dir)) = prev {
                let want_prev = if kind == TagKind::Reduce {
                    Direction::Right
                } else {
                    Direction::Left
                };
                if prev_dir != want_prev {
                    return None;
                }
            }
            match kind {
                TagKind::Shift => Some(stack + 1),
                TagKind::Reduce if stack >= 2 => Some(stack - 1),
                _ => None,
            }
        }
    }
}

/// Successor of `state` under `tag`, or `None` when the edge is invalid.
/// Accepts exactly the sequences `check_validity` accepts.
pub fn transitions(state: &DecoderState, tag: &Tag, scheme: Scheme) -> Option<DecoderState> {
    let stack = step_measure(scheme, state.pos + 1, state.stack, state.prev, tag.kind, tag.dir)?;
    Some(DecoderState {
        pos: state.pos + 1,
        stack,
        prev: Some((tag.kind, tag.dir)),
    })
}

fn is_goal(scheme: Scheme, stack: usize, prev: Option<(TagKind, Direction)>) -> bool {
    match scheme {
        Scheme::In => stack == 1,
        Scheme::Pre => stack == 0,
        Scheme::Post => stack == 1 && matches!(prev, Some((_, Direction::Left))),
    }
}

/// True when a walk that consumed its whole sequence may stop in `state`.
pub fn is_accepting(state: &DecoderState, scheme: Scheme) -> bool {
    state.pos > 0 && is_goal(scheme, state.stack, state.prev)
}

/// Decoder output: the winning tags and their score under the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub tags: TagSequence,
    pub score: f64,
}

fn decode_single_word(table: &ScoreTable) -> Result<Decoded, DecodeError> {
    let tags = vec![Tag::sl()];
    let score = sequence_log_prob(&tags, table)?;
    if !score.is_finite() {
        return Err(DecodeError::NoValidPath { d: 1 });
    }
    Ok(Decoded {
        tags: TagSequence::from_tags(tags),
        score,
    })
}

const PREV_NONE: usize = 4;

fn encode_prev(kind: TagKind, dir: Direction) -> usize {
    match (kind, dir) {
        (TagKind::Shift, Direction::Left) => 0,
        (TagKind::Shift, Direction::Right) => 1,
        (TagKind::Reduce, Direction::Left) => 2,
        (TagKind::Reduce, Direction::Right) => 3,
    }
}

fn decode_prev(p: usize) -> Option<(TagKind, Direction)> {
    match p {
        0 => Some((TagKind::Shift, Direction::Left)),
        1 => Some((TagKind::Shift, Direction::Right)),
        2 => Some((TagKind::Reduce, Direction::Left)),
        3 => Some((TagKind::Reduce, Direction::Right)),
        _ => None,
    }
}

fn tag_meta(table: &ScoreTable) -> Vec<(TagKind, Direction)> {
    table.vocab.tags().iter().map(|t| (t.kind, t.dir)).collect()
}

/// Exact decoding under the independent approximation: a backward max-plus
/// chart over (position, measure, previous tag class), then a forward
/// reconstruction that resolves ties toward the smallest tag index.
pub fn dp_decode(table: &ScoreTable, config: &DecoderConfig) -> Result<Decoded, DecodeError> {
    if table.scheme != config.scheme {
        return Err(DecodeError::SchemeMismatch {
            expected: config.scheme,
            found: table.scheme,
        });
    }
    if table.dependency != DependencyMode::Independent {
        return Err(DecodeError::WrongMode(table.dependency));
    }
    if table.n == 1 {
        return decode_single_word(table);
    }
    let scheme = config.scheme;
    let d = config.max_stack;
    let m = table.slots();
    let meta = tag_meta(table);
    let states = (d + 1) * 5;
    let idx = |stack: usize, prev: usize| stack * 5 + prev;

    let mut chart = vec![vec![f64::NEG_INFINITY; states]; m + 1];
    for stack in 0..=d {
        for p in 0..5 {
            if is_goal(scheme, stack, decode_prev(p)) {
                chart[m][idx(stack, p)] = 0.0;
            }
        }
    }
    for i in (0..m).rev() {
        for stack in 0..=d {
            for p in 0..5 {
                let prev = decode_prev(p);
                let mut best = f64::NEG_INFINITY;
                for (t, &(kind, dir)) in meta.iter().enumerate() {
                    if let Some(next) = step_measure(scheme, i + 1, stack, prev, kind, dir) {
                        if next <= d {
                            let w = table.log_scores[i][t]
                                + chart[i + 1][idx(next, encode_prev(kind, dir))];
                            best = best.max(w);
                        }
                    }
                }
                chart[i][idx(stack, p)] = best;
            }
        }
    }

    let start = initial_measure(scheme);
    if start > d || !chart[0][idx(start, PREV_NONE)].is_finite() {
        return Err(DecodeError::NoValidPath { d });
    }
    let mut tags = Vec::with_capacity(m);
    let mut stack = start;
    let mut p = PREV_NONE;
    for i in 0..m {
        let target = chart[i][idx(stack, p)];
        let mut chosen = None;
        for (t, &(kind, dir)) in meta.iter().enumerate() {
            if let Some(next) = step_measure(scheme, i + 1, stack, decode_prev(p), kind, dir) {
                if next <= d {
                    let w = table.log_scores[i][t]
                        + chart[i + 1][idx(next, encode_prev(kind, dir))];
                    if w == target {
                        chosen = Some((t, next, kind, dir));
                        break;
                    }
                }
            }
        }
        let (t, next, kind, dir) = chosen.expect("finite chart cell admits a continuation");
        tags.push(table.vocab.tag(t).clone());
        stack = next;
        p = encode_prev(kind, dir);
    }
    let score = sequence_log_prob(&tags, table)?;
    Ok(Decoded {
        tags: TagSequence::from_tags(tags),
        score,
    })
}

/// Exact decoding with left- or right-dependent scores: the chart state also
/// remembers the previous tag's identity, and edges add transition scores.
pub fn dp_decode_dependent(
    table: &ScoreTable,
    config: &DecoderConfig,
) -> Result<Decoded, DecodeError> {
    if table.scheme != config.scheme {
        return Err(DecodeError::SchemeMismatch {
            expected: config.scheme,
            found: table.scheme,
        });
    }
    let legal = matches!(
        (table.dependency, table.scheme),
        (DependencyMode::LeftDep, Scheme::Pre) | (DependencyMode::RightDep, Scheme::Post)
    );
    if !legal {
        return Err(DecodeError::IllegalPairing {
            scheme: table.scheme,
            mode: table.dependency,
        });
    }
    let transition = match &table.transition {
        Some(matrix) => matrix,
        None => return Err(DecodeError::WrongMode(table.dependency)),
    };
    if table.n == 1 {
        return decode_single_word(table);
    }
    let scheme = config.scheme;
    let d = config.max_stack;
    let m = table.slots();
    let vocab_len = table.vocab.len();
    let meta = tag_meta(table);
    let none = vocab_len;
    let states = (d + 1) * (vocab_len + 1);
    let idx = |stack: usize, p: usize| stack * (vocab_len + 1) + p;
    let prev_of = |p: usize| if p == none { None } else { Some(meta[p]) };

    let mut chart = vec![vec![f64::NEG_INFINITY; states]; m + 1];
    for stack in 0..=d {
        for p in 0..=vocab_len {
            if is_goal(scheme, stack, prev_of(p)) {
                chart[m][idx(stack, p)] = 0.0;
            }
        }
    }
    for i in (0..m).rev() {
        for stack in 0..=d {
            for p in 0..=vocab_len {
                let prev = prev_of(p);
                let mut best = f64::NEG_INFINITY;
                for (t, &(kind, dir)) in meta.iter().enumerate() {
                    if let Some(next) = step_measure(scheme, i + 1, stack, prev, kind, dir) {
                        if next <= d {
                            let hop = if p == none { 0.0 } else { transition[p][t] };
                            let w = table.log_scores[i][t] + hop + chart[i + 1][idx(next, t)];
                            best = best.max(w);
                        }
                    }
                }
                chart[i][idx(stack, p)] = best;
            }
        }
    }

    let start = initial_measure(scheme);
    if start > d || !chart[0][idx(start, none)].is_finite() {
        return Err(DecodeError::NoValidPath { d });
    }
    let mut tags = Vec::with_capacity(m);
    let mut stack = start;
    let mut p = none;
    for i in 0..m {
        let target = chart[i][idx(stack, p)];
        let mut chosen = None;
        for t in 0..vocab_len {
            let (kind, dir) = meta[t];
            if let Some(next) = step_measure(scheme, i + 1, stack, prev_of(p), kind, dir) {
                if next <= d {
                    let hop = if p == none { 0.0 } else { transition[p][t] };
                    let w = table.log_scores[i][t] + hop + chart[i + 1][idx(next, t)];
                    if w == target {
                        chosen = Some((t, next));
                        break;
                    }
                }
            }
        }
        let (t, next) = chosen.expect("finite chart cell admits a continuation");
        tags.push(table.vocab.tag(t).clone());
        stack = next;
        p = t;
    }
    let score = sequence_log_prob(&tags, table)?;
    Ok(Decoded {
        tags: TagSequence::from_tags(tags),
        score,
    })
}

#[derive(Debug, Clone)]
struct Hypothesis {
    stack: usize,
    prev: usize,
    score: f64,
    tags: Vec<u32>,
}

/// Backward reachability over the DAG: `reach[i][state]` is true when some
/// valid suffix leads from the state at position `i` to a goal at position
/// `m`. Beam search expands only reachable states, so partial hypotheses
/// that could never complete are pruned instead of occupying beam slots.
fn goal_reachability(scheme: Scheme, m: usize, d: usize) -> Vec<Vec<bool>> {
    use Direction::*;
    use TagKind::*;
    let idx = |stack: usize, p: usize| stack * 5 + p;
    let mut reach = vec![vec![false; (d + 1) * 5]; m + 1];
    for stack in 0..=d {
        for p in 0..5 {
            reach[m][idx(stack, p)] = is_goal(scheme, stack, decode_prev(p));
        }
    }
    for i in (0..m).rev() {
        for stack in 0..=d {
            for p in 0..5 {
                let prev = decode_prev(p);
                'tags: for kind in [Shift, Reduce] {
                    for dir in [Left, Right] {
                        if let Some(next) = step_measure(scheme, i + 1, stack, prev, kind, dir) {
                            if next <= d && reach[i + 1][idx(next, encode_prev(kind, dir))] {
                                reach[i][idx(stack, p)] = true;
                                break 'tags;
                            }
                        }
                    }
                }
            }
        }
    }
    reach
}

/// Beam search over the same DAG: keeps the `beam_size` best hypotheses per
/// step, recombining hypotheses that share a chart state. With a beam at
/// least as wide as the live state count it reproduces the exact decoders.
pub fn beam_decode(table: &ScoreTable, config: &DecoderConfig) -> Result<Decoded, DecodeError> {
    if table.scheme != config.scheme {
        return Err(DecodeError::SchemeMismatch {
            expected: config.scheme,
            found: table.scheme,
        });
    }
    match table.dependency {
        DependencyMode::Independent => {
            if table.transition.is_some() {
                return Err(DecodeError::WrongMode(table.dependency));
            }
        }
        DependencyMode::LeftDep | DependencyMode::RightDep => {
            let legal = matches!(
                (table.dependency, table.scheme),
                (DependencyMode::LeftDep, Scheme::Pre) | (DependencyMode::RightDep, Scheme::Post)
            );
            if !legal || table.transition.is_none() {
                return Err(DecodeError::IllegalPairing {
                    scheme: table.scheme,
                    mode: table.dependency,
                });
            }
        }
    }
    if table.n == 1 {
        return decode_single_word(table);
    }
    let scheme = config.scheme;
    let d = config.max_stack;
    let h = config.beam_size.max(1);
    let m = table.slots();
    let meta = tag_meta(table);
    let vocab_len = table.vocab.len();
    let none = vocab_len;
    let dependent = table.transition.is_some();
    let prev_of = |p: usize| if p == none { None } else { Some(meta[p]) };
    // Recombination key: measure plus previous-tag class, or the previous
    // tag itself when transition scores depend on it.
    let key_of = |stack: usize, p: usize| -> (usize, usize) {
        if dependent || p == none {
            (stack, p)
        } else {
            let (kind, dir) = meta[p];
            (stack, encode_prev(kind, dir))
        }
    };

    let start = initial_measure(scheme);
    if start > d {
        return Err(DecodeError::NoValidPath { d });
    }
    let reach = goal_reachability(scheme, m, d);
    let mut beam = vec![Hypothesis {
        stack: start,
        prev: none,
        score: 0.0,
        tags: Vec::new(),
    }];
    for i in 0..m {
        let mut expansions: HashMap<(usize, usize), Hypothesis> = HashMap::new();
        for hyp in &beam {
            for (t, &(kind, dir)) in meta.iter().enumerate() {
                let next = match step_measure(scheme, i + 1, hyp.stack, prev_of(hyp.prev), kind, dir)
                {
                    Some(next) if next <= d => next,
                    _ => continue,
                };
                if !reach[i + 1][next * 5 + encode_prev(kind, dir)] {
                    continue;
                }
                let hop = if dependent && hyp.prev != none {
                    table.transition.as_ref().unwrap()[hyp.prev][t]
                } else {
                    0.0
                };
                let score = hyp.score + table.log_scores[i][t] + hop;
                if score == f64::NEG_INFINITY {
                    continue;
                }
                let mut tags = hyp.tags.clone();
                tags.push(t as u32);
                let candidate = Hypothesis { stack: next, prev: t, score, tags };
                match expansions.entry(key_of(next, t)) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(candidate);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let held = e.get();
                        if candidate.score > held.score
                            || (candidate.score == held.score && candidate.tags < held.tags)
                        {
                            e.insert(candidate);
                        }
                    }
                }
            }
        }
        let mut next_beam: Vec<Hypothesis> = expansions.into_values().collect();
        next_beam.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("scores are never NaN")
                .then_with(|| a.tags.cmp(&b.tags))
        });
        if i + 1 < m {
            next_beam.truncate(h);
        }
        if next_beam.is_empty() {
            return Err(DecodeError::NoValidPath { d });
        }
        beam = next_beam;
    }
    let best = &beam[0];
    let tags: Vec<Tag> = best
        .tags
        .iter()
        .map(|&t| table.vocab.tag(t as usize).clone())
        .collect();
    let score = sequence_log_prob(&tags, table)?;
    Ok(Decoded {
        tags: TagSequence::from_tags(tags),
        score,
    })
}

/// Exhaustively search all valid tag sequences of length `2n-1` and return
/// the best under the shared tie-break. Guarded to small instances; the
/// search walks the validity simulation of the `linearize` module rather than
/// the decoding DAG, so it is an independent check on the charts.
pub fn brute_force_decode(
    table: &ScoreTable,
    scheme: Scheme,
    n: usize,
) -> Result<Decoded, DecodeError> {
    if table.scheme != scheme {
        return Err(DecodeError::SchemeMismatch {
            expected: scheme,
            found: table.scheme,
        });
    }
    if n != table.n {
        return Err(DecodeError::Score(ScoreError::DimensionMismatch {
            what: "words",
            expected: table.n,
            found: n,
        }));
    }
    if n > 5 || table.vocab.len() > 8 {
        return Err(DecodeError::GuardExceeded {
            n,
            vocab: table.vocab.len(),
        });
    }
    let m = 2 * n - 1;
    let mut best: Option<(f64, Vec<Tag>)> = None;
    let mut tags: Vec<Tag> = Vec::with_capacity(m);
    search(table, m, StackSim::new(scheme), &mut tags, &mut best)?;
    match best {
        Some((score, tags)) => Ok(Decoded {
            tags: TagSequence::from_tags(tags),
            score,
        }),
        // No measure can exceed the word count, so n is the honest bound.
        None => Err(DecodeError::NoValidPath { d: n }),
    }
}

fn search(
    table: &ScoreTable,
    m: usize,
    sim: StackSim,
    tags: &mut Vec<Tag>,
    best: &mut Option<(f64, Vec<Tag>)>,
) -> Result<(), DecodeError> {
    if tags.len() == m {
        if sim.finish().is_ok() {
            let score = sequence_log_prob(tags, table)?;
            if score > f64::NEG_INFINITY {
                // Strict improvement keeps the first, lexicographically
                // smallest maximizer.
                if best.as_ref().is_none_or(|(b, _)| score > *b) {
                    *best = Some((score, tags.clone()));
                }
            }
        }
        return Ok(());
    }
    for tag in table.vocab.tags() {
        let mut next = sim;
        if next.step(tag.kind, tag.dir).is_ok() {
            tags.push(tag.clone());
            search(table, m, next, tags, best)?;
            tags.pop();
        }
    }
    Ok(())
}
