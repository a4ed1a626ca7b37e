//! Seeded cross-module property tests: normalization roundtrips, linearizer
//! disciplines, agreement between the decoding DAG and the validity checker,
//! and the consistency of the tree score with the factored tag score.

use std::collections::HashMap;

use rand::Rng;

use treeline::decode::{is_accepting, transitions, DecoderState};
use treeline::linearize::{
    check_validity, format_tag_line, linearize, tags_to_tree, Direction, Scheme, Tag, TagKind,
};
use treeline::prelude::*;
use treeline::score::Production;
use treeline::synth;
use treeline::transform::mirror;

fn owned_leaves(tree: &ParseTree) -> Vec<(String, String)> {
    tree.leaves()
        .into_iter()
        .map(|(p, w)| (p.to_string(), w.to_string()))
        .collect()
}

#[test]
fn treebank_roundtrips_hold_on_random_nary_trees() {
    let mut rng = synth::rng(101);
    for _ in 0..1000 {
        let tree = synth::random_nary_tree(&mut rng, 12, 5);
        let words: Vec<String> = tree.words().iter().map(|w| w.to_string()).collect();

        let parsed = parse_bracketed(&format_bracketed(&tree)).unwrap();
        assert_eq!(parsed, vec![tree.clone()]);

        let collapsed = collapse_unaries(tree.clone(), "+").unwrap();
        assert_eq!(collapsed.words(), words);
        assert_eq!(expand_unaries(collapsed.clone(), "+"), tree);

        let binary = binarize(collapsed.clone());
        assert!(binary.is_strictly_binary());
        assert_eq!(binary.words(), words);
        assert_eq!(debinarize(binary).unwrap(), collapsed);
    }
}

#[test]
fn corner_transforms_mirror_and_preserve_yields() {
    let mut rng = synth::rng(103);
    for _ in 0..500 {
        let n = rng.random_range(1..=25);
        let tree = synth::random_binary_tree(&mut rng, n);
        let rc = right_corner(&tree).unwrap();
        let lc = left_corner(&tree).unwrap();
        assert_eq!(rc.words(), tree.words());
        assert_eq!(lc.words(), tree.words());
        assert_eq!(right_corner(&mirror(&tree)).unwrap(), mirror(&lc));
    }
}

#[test]
fn linearizers_are_injective_over_a_fixed_yield() {
    let mut rng = synth::rng(107);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(2..=12);
        let a = synth::random_binary_tree(&mut rng, n);
        let mut b = synth::random_binary_tree(&mut rng, n);
        // Same yield, possibly different shape/labels.
        if let (ParseTree::Node { .. }, ParseTree::Node { .. }) = (&a, &b) {
            let leaves = owned_leaves(&a);
            b = relabel_leaves(b, &leaves);
            if a == b {
                continue;
            }
            for scheme in Scheme::ALL {
                let ta = linearize(&a, scheme).unwrap();
                let tb = linearize(&b, scheme).unwrap();
                assert_ne!(
                    ta.tags,
                    tb.tags,
                    "distinct trees share a {scheme} sequence:\n{a}\n{b}"
                );
            }
            checked += 1;
        }
    }
}

fn relabel_leaves(tree: ParseTree, leaves: &[(String, String)]) -> ParseTree {
    fn go(tree: ParseTree, leaves: &[(String, String)], next: &mut usize) -> ParseTree {
        match tree {
            ParseTree::Leaf { .. } => {
                let (p, w) = &leaves[*next];
                *next += 1;
                ParseTree::leaf(p.clone(), w.clone())
            }
            ParseTree::Node { label, children } => ParseTree::node(
                label,
                children.into_iter().map(|c| go(c, leaves, next)).collect(),
            ),
            eps => eps,
        }
    }
    let mut next = 0;
    go(tree, leaves, &mut next)
}

#[test]
fn direction_disciplines_hold_by_construction() {
    let mut rng = synth::rng(109);
    for _ in 0..500 {
        let n = rng.random_range(1..=20);
        let tree = synth::random_binary_tree(&mut rng, n);

        let pre = linearize(&tree, Scheme::Pre).unwrap().tags;
        assert_eq!(pre[0].dir, Direction::Left);
        for i in 1..pre.len() {
            let want = if pre[i - 1].kind == TagKind::Shift {
                Direction::Right
            } else {
                Direction::Left
            };
            assert_eq!(pre[i].dir, want, "pre discipline at {i}");
        }

        let post = linearize(&tree, Scheme::Post).unwrap().tags;
        for i in 0..post.len() {
            let want = match post.get(i + 1) {
                Some(next) if next.kind == TagKind::Reduce => Direction::Right,
                _ => Direction::Left,
            };
            assert_eq!(post[i].dir, want, "post discipline at {i}");
        }

        let tetra = linearize(&tree, Scheme::In).unwrap().tags;
        for (i, tag) in tetra.iter().enumerate() {
            let want = if i % 2 == 0 { TagKind::Shift } else { TagKind::Reduce };
            assert_eq!(tag.kind, want, "in-order parity at {i}");
        }
    }
}

fn walk_dag(tags: &[Tag], scheme: Scheme) -> bool {
    let mut state = DecoderState::start(scheme);
    for tag in tags {
        match transitions(&state, tag, scheme) {
            Some(next) => state = next,
            None => return false,
        }
    }
    is_accepting(&state, scheme)
}

#[test]
fn dag_transitions_accept_exactly_what_check_validity_accepts() {
    let mut rng = synth::rng(113);
    let pool = [Tag::sl(), Tag::sr(), Tag::rl("S"), Tag::rr("S"), Tag::rl("X"), Tag::rr("X")];
    for trial in 0..4000 {
        let scheme = Scheme::ALL[rng.random_range(0..3)];
        let tags: Vec<Tag> = if trial % 2 == 0 {
            // Gold sequences, sometimes corrupted in one position.
            let n = rng.random_range(1..=10);
            let tree = synth::random_binary_tree(&mut rng, n);
            let mut tags = linearize(&tree, scheme).unwrap().tags;
            if rng.random_range(0..2) == 0 && !tags.is_empty() {
                let at = rng.random_range(0..tags.len());
                tags[at] = pool[rng.random_range(0..pool.len())].clone();
            }
            tags
        } else {
            let len = rng.random_range(1..=13);
            (0..len)
                .map(|_| pool[rng.random_range(0..pool.len())].clone())
                .collect()
        };
        let report = check_validity(&tags, scheme);
        assert_eq!(
            walk_dag(&tags, scheme),
            report.valid,
            "disagreement on {scheme}: {}",
            format_tag_line(&tags)
        );
    }
}

#[test]
fn valid_sequences_rebuild_and_relinearize_to_themselves() {
    let mut rng = synth::rng(127);
    for _ in 0..500 {
        let n = rng.random_range(1..=15);
        let tree = synth::random_binary_tree(&mut rng, n);
        let leaves = owned_leaves(&tree);
        for scheme in Scheme::ALL {
            let seq = linearize(&tree, scheme).unwrap();
            let report = check_validity(&seq.tags, scheme);
            assert!(report.valid);
            assert_eq!(report.profile.len(), seq.len());
            let back = tags_to_tree(&seq.tags, &leaves, scheme).unwrap();
            assert_eq!(linearize(&back, scheme).unwrap(), seq);
        }
    }
}

#[test]
fn raising_an_own_slot_score_never_hurts_a_sequence() {
    let mut rng = synth::rng(131);
    let vocab = TagVocab::with_labels(synth::LABELS);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let tree = synth::random_binary_tree(&mut rng, n);
        let scheme = Scheme::ALL[rng.random_range(0..3)];
        let seq = linearize(&tree, scheme).unwrap();
        let mut table = synth::random_table(&mut rng, scheme, n, &vocab);
        let before = sequence_log_prob(&seq.tags, &table).unwrap();
        let slot = rng.random_range(0..table.log_scores.len());
        let idx = table.vocab.index_of(&seq.tags[slot]).unwrap();
        table.log_scores[slot][idx] += rng.random_range(0.0..3.0);
        let after = sequence_log_prob(&seq.tags, &table).unwrap();
        assert!(after >= before);
    }
}

/// Factored production weights reproduce the per-tag reduce scores of the
/// in-order sequence up to the root factor, grounding the independent
/// approximation.
#[test]
fn factored_tree_scores_match_reduce_tag_scores() {
    let mut rng = synth::rng(137);
    let mut left_factor: HashMap<String, f64> = HashMap::new();
    let mut right_factor: HashMap<String, f64> = HashMap::new();
    for label in synth::LABELS {
        left_factor.insert(label.to_string(), rng.random_range(0.1..2.0));
        right_factor.insert(label.to_string(), rng.random_range(0.1..2.0));
    }
    let factor = |map: &HashMap<String, f64>, symbol: &str| -> f64 {
        // Preterminal children carry no factor.
        map.get(symbol).copied().unwrap_or(1.0)
    };
    for _ in 0..200 {
        let n = rng.random_range(2..=15);
        let tree = synth::random_binary_tree_rooted(&mut rng, n);
        let mut weights: HashMap<Production, f64> = HashMap::new();
        collect_productions(&tree, &mut |parent, children| {
            let w = factor(&left_factor, &children[0]) * factor(&right_factor, &children[1]);
            weights.insert(Production::new(parent, children.to_vec()), w);
        });
        let tree_score = tree_log_score(&tree, &weights).unwrap();
        let tags = linearize(&tree, Scheme::In).unwrap().tags;
        let mut tag_score = 0.0;
        for tag in &tags {
            if tag.kind == TagKind::Reduce {
                let label = tag.label.as_deref().unwrap();
                let map = match tag.dir {
                    Direction::Left => &left_factor,
                    Direction::Right => &right_factor,
                };
                tag_score += factor(map, label).ln();
            }
        }
        // The root is tagged but is nobody's child.
        let expected = tag_score - factor(&left_factor, "S").ln();
        assert!(
            (tree_score - expected).abs() < 1e-9,
            "tree {tree_score} vs tags {expected}"
        );
    }
}

fn collect_productions(tree: &ParseTree, f: &mut impl FnMut(&str, &[String])) {
    if let ParseTree::Node { label, children } = tree {
        let symbols: Vec<String> = children.iter().map(|c| c.symbol().to_string()).collect();
        f(label, &symbols);
        for c in children {
            collect_productions(c, f);
        }
    }
}

#[test]
fn deviation_ignores_nonterminal_labels() {
    let mut rng = synth::rng(151);
    for _ in 0..200 {
        let n = rng.random_range(1..=20);
        let tree = synth::random_binary_tree(&mut rng, n);
        let relabeled = relabel_nodes(tree.clone());
        for scheme in Scheme::ALL {
            assert_eq!(
                treeline::align::deviation_profile(&tree, scheme).unwrap(),
                treeline::align::deviation_profile(&relabeled, scheme).unwrap()
            );
        }
    }
}

fn relabel_nodes(tree: ParseTree) -> ParseTree {
    match tree {
        ParseTree::Node { label, children } => ParseTree::node(
            format!("Z{label}"),
            children.into_iter().map(relabel_nodes).collect(),
        ),
        other => other,
    }
}

#[test]
fn widening_the_stack_bound_never_hurts_the_dp() {
    let mut rng = synth::rng(157);
    let vocab = TagVocab::with_labels(["S", "NP"]);
    for _ in 0..150 {
        let n = rng.random_range(2..=6);
        let scheme = Scheme::ALL[rng.random_range(0..3)];
        let table = synth::random_table(&mut rng, scheme, n, &vocab);
        let mut last: Option<f64> = None;
        for d in 1..=n {
            match dp_decode(&table, &DecoderConfig::dp(scheme, d)) {
                Ok(out) => {
                    if let Some(prev) = last {
                        assert!(out.score >= prev, "score fell when d grew to {d}");
                    }
                    last = Some(out.score);
                }
                Err(_) => assert!(last.is_none(), "a path vanished when d grew to {d}"),
            }
        }
        // Past the deepest possible profile the result is d-independent.
        let at_n = dp_decode(&table, &DecoderConfig::dp(scheme, n)).unwrap();
        let wider = dp_decode(&table, &DecoderConfig::dp(scheme, n + 5)).unwrap();
        assert_eq!(at_n.tags, wider.tags);
        assert_eq!(at_n.score, wider.score);
    }
}

#[test]
fn oracle_tables_admit_exactly_one_finite_valid_sequence() {
    let mut rng = synth::rng(139);
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let tree = synth::random_binary_tree(&mut rng, n);
        for scheme in Scheme::ALL {
            let vocab = build_tag_vocab(std::slice::from_ref(&tree), scheme).unwrap();
            if vocab.len() > 8 {
                continue;
            }
            let table = oracle_scores(&tree, scheme, &vocab).unwrap();
            let best = brute_force_decode(&table, scheme, n).unwrap();
            assert_eq!(best.tags, linearize(&tree, scheme).unwrap());
            assert_eq!(best.score, 0.0);
        }
    }
}

#[test]
fn score_files_roundtrip_random_tables() {
    let mut rng = synth::rng(163);
    let vocab = TagVocab::with_labels(synth::LABELS);
    for i in 0..10 {
        let n = rng.random_range(1..=12);
        let scheme = Scheme::ALL[i % 3];
        let mut table = if i % 2 == 0 {
            synth::random_table(&mut rng, scheme, n, &vocab)
        } else {
            let (scheme, mode) = if i % 4 == 1 {
                (Scheme::Pre, DependencyMode::LeftDep)
            } else {
                (Scheme::Post, DependencyMode::RightDep)
            };
            synth::random_dependent_table(&mut rng, scheme, n, &vocab, mode)
        };
        table.id = format!("t{i}");
        let line = treeline::score::to_json_line(&table).unwrap();
        let back = treeline::score::from_json_line(&line, i + 1).unwrap();
        assert_eq!(back.id, table.id);
        assert_eq!(back.n, table.n);
        assert_eq!(back.scheme, table.scheme);
        assert_eq!(back.dependency, table.dependency);
        assert_eq!(back.log_scores, table.log_scores);
        assert_eq!(back.transition, table.transition);
        assert_eq!(back.vocab.tags(), table.vocab.tags());
    }
}

#[test]
fn histograms_over_right_branching_corpora_split_by_scheme() {
    let mut rng = synth::rng(167);
    let corpus: Vec<ParseTree> = (0..100)
        .map(|_| synth::right_chain(rng.random_range(2..=20)))
        .collect();
    let post = treeline::align::deviation_histogram(&corpus, Scheme::Post, 16).unwrap();
    assert!(post.mean > 0.0);
    let pre = treeline::align::deviation_histogram(&corpus, Scheme::Pre, 16).unwrap();
    assert_eq!(pre.mean, 0.0);
    assert_eq!(pre.counts[0], pre.words);
}

#[test]
fn in_order_coverage_dominates_on_one_sided_corpora() {
    let mut rng = synth::rng(173);
    let rights: Vec<ParseTree> = (0..300)
        .map(|_| synth::right_chain(rng.random_range(1..=30)))
        .collect();
    let lefts: Vec<ParseTree> = (0..300)
        .map(|_| synth::left_chain(rng.random_range(1..=30)))
        .collect();
    for (corpus, rival) in [(&rights, Scheme::Post), (&lefts, Scheme::Pre)] {
        let tetra = coverage_curve(corpus, Scheme::In).unwrap();
        let other = coverage_curve(corpus, rival).unwrap();
        for (depth, coverage) in &other {
            let tetra_at = tetra
                .iter()
                .find(|(d, _)| d == depth)
                .map(|(_, c)| *c)
                .unwrap_or(1.0);
            assert!(
                tetra_at >= *coverage,
                "{rival} coverage beats in-order at depth {depth}"
            );
        }
    }
}

#[test]
fn f1_is_total_iff_bracket_multisets_match() {
    let mut rng = synth::rng(149);
    let cfg = EvalbConfig::default();
    for _ in 0..300 {
        let n = rng.random_range(1..=10);
        let gold = synth::random_binary_tree(&mut rng, n);
        let pred = relabel_leaves(
            synth::random_binary_tree(&mut rng, n),
            &gold
                .leaves()
                .iter()
                .map(|(p, w)| (p.to_string(), w.to_string()))
                .collect::<Vec<_>>(),
        );
        let (_, _, f) = bracket_prf(&gold, &pred, &cfg).unwrap();
        assert!((0.0..=100.0).contains(&f));
        let equal = treeline::eval::bracket_multiset(&gold, &cfg)
            == treeline::eval::bracket_multiset(&pred, &cfg);
        assert_eq!(f == 100.0, equal);
    }
}
