//! Acceptance suite. Each test exercises one numbered criterion end to end
//! and prints a single pass/fail line (visible with `--nocapture`).
//!
//! Criterion 9 has an optional corpus-scale part that runs only when
//! `WSJ_TEST_PATH` points at a bracketed WSJ test file.

use std::time::{Duration, Instant};

use rand::Rng;

use treeline::decode::beam_decode;
use treeline::linearize::check_validity;
use treeline::prelude::*;
use treeline::score::DependencyMode;
use treeline::synth;
use treeline::verify;

macro_rules! check {
    ($cond:expr, $($arg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)+)),
        }
    };
}

fn run_criterion(no: usize, name: &str, body: impl FnOnce() -> Result<String, String>) {
    let t0 = Instant::now();
    let result = body();
    let elapsed = t0.elapsed();
    match &result {
        Ok(note) => {
            let sep = if note.is_empty() { "" } else { "; " };
            println!("criterion {no:02} ({name}): PASS in {elapsed:.2?}{sep}{note}");
        }
        Err(e) => println!("criterion {no:02} ({name}): FAIL in {elapsed:.2?} - {e}"),
    }
    if let Err(e) = result {
        panic!("criterion {no:02} ({name}) failed: {e}");
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    if elapsed <= budget {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, budget {budget:.2?}"))
    }
}

fn running_example() -> ParseTree {
    parse_bracketed("(S (PRP She) (VP (V enjoys) (VP (V reading) (N papers))))")
        .unwrap()
        .remove(0)
}

fn owned_leaves(tree: &ParseTree) -> Vec<(String, String)> {
    tree.leaves()
        .into_iter()
        .map(|(p, w)| (p.to_string(), w.to_string()))
        .collect()
}

#[test]
fn criterion_01_running_example_golden_sequences() {
    run_criterion(1, "golden sequences of the running example", || {
        let t0 = Instant::now();
        let tree = running_example();
        let cases = [
            (Scheme::Pre, "rl:S sl rr:VP sl rr:VP sl sr"),
            (Scheme::Post, "sl sl sl sr rr:VP rr:VP rl:S"),
            (Scheme::In, "sl rl:S sl rr:VP sl rr:VP sr"),
        ];
        for (scheme, expected) in cases {
            let got = linearize(&tree, scheme).unwrap().to_string();
            check!(got == expected, "{scheme}: got `{got}`, expected `{expected}`");
        }
        within(t0.elapsed(), Duration::from_secs(1))?;
        Ok(String::new())
    });
}

#[test]
fn criterion_02_roundtrip_1000_random_trees() {
    run_criterion(2, "linearize/rebuild roundtrip", || {
        let t0 = Instant::now();
        let outcome = verify::roundtrip(1000, 2024);
        check!(
            outcome.all_passed(),
            "{} of {} trials failed; first: {:?}",
            outcome.trials - outcome.passed,
            outcome.trials,
            outcome.first_failure
        );
        within(t0.elapsed(), Duration::from_secs(10))?;
        Ok(format!("{outcome}"))
    });
}

#[test]
fn criterion_03_right_corner_equivalence() {
    run_criterion(3, "right-corner map/merge equivalence", || {
        // The worked example first, then the seeded suite.
        let tree = running_example();
        let rc = right_corner(&tree).unwrap();
        let actions = sr_actions(&rc, Scheme::Post).unwrap();
        let merged = treeline::linearize::map_merge_rc(&actions).unwrap();
        let tetra = linearize(&tree, Scheme::In).unwrap();
        check!(merged == tetra, "running example disagrees");
        let outcome = verify::rc_equivalence(1000, 31);
        check!(
            outcome.all_passed(),
            "{} failures; first: {:?}",
            outcome.trials - outcome.passed,
            outcome.first_failure
        );
        Ok(format!("{outcome}"))
    });
}

#[test]
fn criterion_04_left_corner_equivalence() {
    run_criterion(4, "left-corner map/merge equivalence", || {
        let tree = running_example();
        let lc = left_corner(&tree).unwrap();
        let actions = sr_actions(&lc, Scheme::Pre).unwrap();
        let merged = treeline::linearize::map_merge_lc(&actions).unwrap();
        let tetra = linearize(&tree, Scheme::In).unwrap();
        check!(merged == tetra, "running example disagrees");
        let outcome = verify::lc_equivalence(1000, 41);
        check!(
            outcome.all_passed(),
            "{} failures; first: {:?}",
            outcome.trials - outcome.passed,
            outcome.first_failure
        );
        Ok(format!("{outcome}"))
    });
}

#[test]
fn criterion_05_deviation_propositions() {
    run_criterion(5, "deviation propositions", || {
        // In-order is shift-aligned on every tree.
        let mut rng = synth::rng(55);
        for _ in 0..300 {
            let n = rng.random_range(1..=30);
            let tree = synth::random_binary_tree(&mut rng, n);
            let profile = treeline::align::deviation_profile(&tree, Scheme::In).unwrap();
            check!(profile.max == 0, "in-order deviation {} != 0", profile.max);
        }
        // Pre-order on left chains: first-word deviation floor(N/2), odd N.
        for n in (5..=41).step_by(2) {
            let profile =
                treeline::align::deviation_profile(&synth::left_chain(n), Scheme::Pre).unwrap();
            check!(
                profile.deviations[0] == n / 2,
                "pre left chain n={n}: first-word deviation {} != {}",
                profile.deviations[0],
                n / 2
            );
        }
        // Post-order on right chains, mirrored.
        for n in (5..=41).step_by(2) {
            let profile =
                treeline::align::deviation_profile(&synth::right_chain(n), Scheme::Post).unwrap();
            check!(
                *profile.deviations.last().unwrap() == n / 2,
                "post right chain n={n}: last-word deviation {} != {}",
                profile.deviations.last().unwrap(),
                n / 2
            );
        }
        // Linear growth overall (Theta(N), checked as N/4 <= max <= N).
        for n in [10, 20, 40, 80] {
            let pre = treeline::align::deviation_profile(&synth::left_chain(n), Scheme::Pre)
                .unwrap()
                .max;
            let post = treeline::align::deviation_profile(&synth::right_chain(n), Scheme::Post)
                .unwrap()
                .max;
            check!(pre >= n / 4 && pre <= n, "pre max deviation {pre} not linear in {n}");
            check!(post >= n / 4 && post <= n, "post max deviation {post} not linear in {n}");
        }
        Ok(String::new())
    });
}

/// The shared instance set for criteria 6 and 7: per scheme, 200 seeded
/// independent tables, plus 200 dependent tables per legal pairing.
fn exactness_instances() -> Vec<ScoreTable> {
    let vocab = TagVocab::with_labels(["S", "NP", "VP"]);
    let mut tables = Vec::new();
    for (s, scheme) in Scheme::ALL.into_iter().enumerate() {
        let mut rng = synth::rng(600 + s as u64);
        for _ in 0..200 {
            let n = rng.random_range(2..=4);
            tables.push(synth::random_table(&mut rng, scheme, n, &vocab));
        }
    }
    for (s, (scheme, mode)) in [
        (Scheme::Pre, DependencyMode::LeftDep),
        (Scheme::Post, DependencyMode::RightDep),
    ]
    .into_iter()
    .enumerate()
    {
        let mut rng = synth::rng(700 + s as u64);
        for _ in 0..200 {
            let n = rng.random_range(2..=4);
            tables.push(synth::random_dependent_table(&mut rng, scheme, n, &vocab, mode));
        }
    }
    tables
}

#[test]
fn criterion_06_dp_matches_brute_force() {
    run_criterion(6, "dp exactness vs brute force", || {
        let t0 = Instant::now();
        let tables = exactness_instances();
        let mut count = 0;
        for table in &tables {
            let exact = match table.dependency {
                DependencyMode::Independent => {
                    dp_decode(table, &DecoderConfig::dp(table.scheme, table.n))
                }
                mode => dp_decode_dependent(
                    table,
                    &DecoderConfig::dependent(table.scheme, mode, table.n),
                ),
            }
            .map_err(|e| format!("instance {count}: {e}"))?;
            let oracle = brute_force_decode(table, table.scheme, table.n)
                .map_err(|e| format!("instance {count}: {e}"))?;
            check!(
                (exact.score - oracle.score).abs() <= 1e-9,
                "instance {count} ({}, {:?}): score {} vs {}",
                table.scheme,
                table.dependency,
                exact.score,
                oracle.score
            );
            check!(
                exact.tags == oracle.tags,
                "instance {count} ({}, {:?}): sequences differ",
                table.scheme,
                table.dependency
            );
            count += 1;
        }
        within(t0.elapsed(), Duration::from_secs(60))?;
        Ok(format!("{count} instances"))
    });
}

/// Note: the monotonicity clause asserted here does not hold for beam search
/// in general. A wider beam's extra hypotheses can evict the state a
/// narrower beam followed to a better finish, and that happens on roughly
/// 1.5% of random instances regardless of seeding. It is asserted as stated
/// all the same; the convergence and bounded-by-exact clauses hold on every
/// instance.
#[test]
fn criterion_07_beam_convergence() {
    run_criterion(7, "beam convergence", || {
        let tables = exactness_instances();
        let mut violations = 0usize;
        let mut first_violation = String::new();
        for (i, table) in tables.iter().enumerate() {
            let d = table.n;
            let (exact, exact_at) = match table.dependency {
                DependencyMode::Independent => (
                    dp_decode(table, &DecoderConfig::dp(table.scheme, d))
                        .map_err(|e| format!("instance {i}: {e}"))?,
                    d * 4,
                ),
                mode => (
                    dp_decode_dependent(table, &DecoderConfig::dependent(table.scheme, mode, d))
                        .map_err(|e| format!("instance {i}: {e}"))?,
                    d * table.vocab.len(),
                ),
            };
            let mut last = f64::NEG_INFINITY;
            for h in 1..=(exact_at + 2) {
                let beam = beam_decode(table, &DecoderConfig::beam(table.scheme, d, h))
                    .map_err(|e| format!("instance {i}, h={h}: {e}"))?;
                if beam.score < last {
                    violations += 1;
                    if first_violation.is_empty() {
                        first_violation = format!(
                            "instance {i} ({}, n={}): beam score fell from {last} to {} at h={h}",
                            table.scheme, table.n, beam.score
                        );
                    }
                }
                check!(
                    beam.score <= exact.score,
                    "instance {i}: beam beat the exact decoder at h={h}"
                );
                if h >= exact_at {
                    check!(
                        beam.score == exact.score && beam.tags == exact.tags,
                        "instance {i}: beam at h={h} differs from dp"
                    );
                }
                last = beam.score;
            }
        }
        check!(
            violations == 0,
            "convergence and dp-boundedness held on all {} instances, but beam scores \
             are not non-decreasing in h: {violations} instances dipped (first: \
             {first_violation}); width-limited beam search does not have this property",
            tables.len()
        );
        Ok(format!("{} instances, widths up to d*|T|+2", tables.len()))
    });
}

#[test]
fn criterion_08_decoder_validity_under_noise() {
    run_criterion(8, "decoder validity under noise", || {
        let mut rng = synth::rng(88);
        let mut decoded = 0;
        for round in 0..100 {
            let n = rng.random_range(2..=14);
            let tree = synth::random_binary_tree(&mut rng, n);
            for scheme in Scheme::ALL {
                let vocab = build_tag_vocab(std::slice::from_ref(&tree), scheme).unwrap();
                for (s, sigma) in [(1.0, 1u64), (5.0, 2u64)] {
                    let table =
                        perturbed_scores(&tree, scheme, &vocab, s, 1000 * round + sigma).unwrap();
                    let d = required_stack_depth(&tree, scheme).unwrap().max(2);
                    let dp = dp_decode(&table, &DecoderConfig::dp(scheme, d))
                        .map_err(|e| format!("dp {scheme} sigma={s}: {e}"))?;
                    check!(
                        check_validity(&dp.tags.tags, scheme).valid,
                        "dp emitted an invalid sequence ({scheme}, sigma={s})"
                    );
                    let beam = beam_decode(&table, &DecoderConfig::beam(scheme, d, 4))
                        .map_err(|e| format!("beam {scheme} sigma={s}: {e}"))?;
                    check!(
                        check_validity(&beam.tags.tags, scheme).valid,
                        "beam emitted an invalid sequence ({scheme}, sigma={s})"
                    );
                    decoded += 2;
                }
            }
        }
        Ok(format!("{decoded} decodes, all valid"))
    });
}

#[test]
fn criterion_09_stack_depth_structure() {
    run_criterion(9, "stack-depth structure", || {
        for n in 2..=50 {
            let right = synth::right_chain(n);
            check!(
                required_stack_depth(&right, Scheme::In).unwrap() <= 2,
                "right chain n={n}: in-order depth > 2"
            );
            check!(
                required_stack_depth(&right, Scheme::Pre).unwrap() <= 2,
                "right chain n={n}: pre-order depth > 2"
            );
            check!(
                required_stack_depth(&right, Scheme::Post).unwrap() == n,
                "right chain n={n}: post-order depth != n"
            );
            let left = synth::left_chain(n);
            check!(
                required_stack_depth(&left, Scheme::In).unwrap() <= 2,
                "left chain n={n}: in-order depth > 2"
            );
            check!(
                required_stack_depth(&left, Scheme::Post).unwrap() <= 2,
                "left chain n={n}: post-order depth > 2"
            );
            check!(
                required_stack_depth(&left, Scheme::Pre).unwrap() == n,
                "left chain n={n}: pre-order depth != n"
            );
        }
        let mut rng = synth::rng(99);
        let corpus: Vec<ParseTree> = (0..200)
            .map(|_| {
                let n = rng.random_range(1..=25);
                synth::random_binary_tree(&mut rng, n)
            })
            .collect();
        for scheme in Scheme::ALL {
            let curve = coverage_curve(&corpus, scheme).unwrap();
            for pair in curve.windows(2) {
                check!(pair[0].1 <= pair[1].1, "{scheme} coverage not monotone");
            }
            check!(
                curve.last().unwrap().1 == 1.0,
                "{scheme} coverage does not reach 1.0"
            );
        }
        let note = match std::env::var("WSJ_TEST_PATH") {
            Ok(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read WSJ_TEST_PATH {path}: {e}"))?;
                let mut trees = Vec::new();
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    let raw = parse_bracketed(line)
                        .map_err(|e| format!("WSJ parse error: {e}"))?
                        .remove(0);
                    trees.push(binarize(collapse_unaries(raw, "+").map_err(|e| e.to_string())?));
                }
                let at = |scheme: Scheme, depth: usize| -> Result<bool, String> {
                    let curve = coverage_curve(&trees, scheme).map_err(|e| e.to_string())?;
                    Ok(curve
                        .iter()
                        .find(|(d, _)| *d == depth)
                        .map(|(_, c)| *c == 1.0)
                        .unwrap_or(depth >= curve.len()))
                };
                check!(at(Scheme::In, 6)?, "WSJ in-order coverage not 1.0 at depth 6");
                check!(at(Scheme::Post, 29)?, "WSJ post-order coverage not 1.0 at depth 29");
                format!("WSJ corpus checked ({} trees)", trees.len())
            }
            Err(_) => "WSJ part skipped (set WSJ_TEST_PATH to enable)".to_string(),
        };
        Ok(note)
    });
}

#[test]
fn criterion_10_eval_correctness() {
    run_criterion(10, "eval correctness", || {
        let cfg = EvalbConfig::default();
        let (p, r, f) = bracket_prf(&running_example(), &running_example(), &cfg).unwrap();
        check!((p, r, f) == (100.0, 100.0, 100.0), "self comparison not perfect");
        let pred = parse_bracketed("(S (PRP She) (VP (VP (V enjoys) (V reading)) (N papers)))")
            .unwrap()
            .remove(0);
        let (p, r, f) = bracket_prf(&running_example(), &pred, &cfg).unwrap();
        for (name, v) in [("precision", p), ("recall", r), ("f1", f)] {
            check!(
                (v - 66.67).abs() <= 0.01,
                "two-thirds example: {name} {v} not 66.67 +- 0.01"
            );
        }
        let xs = [0.5, 1.5, 2.0, 3.5, 5.0];
        let doubled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let (r1, _) = pearson(&xs, &doubled).unwrap();
        check!((r1 - 1.0).abs() <= 1e-12, "pearson(x, 2x) = {r1} != 1");
        let negated: Vec<f64> = xs.iter().map(|x| -x).collect();
        let (r2, _) = pearson(&xs, &negated).unwrap();
        check!((r2 + 1.0).abs() <= 1e-12, "pearson(x, -x) = {r2} != -1");
        Ok(String::new())
    });
}

#[test]
fn criterion_11_end_to_end_pipeline() {
    run_criterion(11, "end-to-end oracle pipeline", || {
        let t0 = Instant::now();
        let mut rng = synth::rng(1111);
        let originals: Vec<ParseTree> = (0..500)
            .map(|_| synth::random_nary_tree_sized(&mut rng, 8, 4, 30))
            .collect();
        for scheme in Scheme::ALL {
            let normalized: Vec<ParseTree> = originals
                .iter()
                .map(|t| binarize(collapse_unaries(t.clone(), "+").unwrap()))
                .collect();
            let vocab = build_tag_vocab(&normalized, scheme).unwrap();
            let d = treeline::eval::corpus_max_stack(&normalized, scheme).unwrap();
            let mut predictions = Vec::with_capacity(originals.len());
            for tree in &normalized {
                let table = oracle_scores(tree, scheme, &vocab).unwrap();
                let out = dp_decode(&table, &DecoderConfig::dp(scheme, d))
                    .map_err(|e| format!("{scheme}: {e}"))?;
                let rebuilt = tags_to_tree(&out.tags.tags, &owned_leaves(tree), scheme)
                    .map_err(|e| format!("{scheme}: {e}"))?;
                let denorm = expand_unaries(debinarize(rebuilt).unwrap(), "+");
                predictions.push(denorm);
            }
            let (_, _, f) = corpus_prf(&originals, &predictions, &EvalbConfig::default())
                .map_err(|e| format!("{scheme}: {e}"))?;
            check!(f == 100.0, "{scheme}: corpus F1 {f} != 100.00");
            check!(
                predictions == originals,
                "{scheme}: some decoded tree differs from its original"
            );
        }
        within(t0.elapsed(), Duration::from_secs(30))?;
        Ok("500 trees x 3 schemes, F1 = 100.00".to_string())
    });
}

#[test]
fn criterion_12_runtime_scaling() {
    run_criterion(12, "dp runtime scaling", || {
        let vocab = TagVocab::with_labels(["S", "NP", "VP"]);
        let d = 8;
        let config = DecoderConfig::dp(Scheme::In, d);
        let lengths = [10usize, 20, 40, 80];
        let mut points = Vec::new();
        for &n in &lengths {
            let mut rng = synth::rng(1200 + n as u64);
            let table = synth::random_table(&mut rng, Scheme::In, n, &vocab);
            // Warm up, then repeat until the sample is long enough to time.
            dp_decode(&table, &config).map_err(|e| e.to_string())?;
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let mut reps = 1usize;
                loop {
                    let t0 = Instant::now();
                    for _ in 0..reps {
                        let out = dp_decode(&table, &config).map_err(|e| e.to_string())?;
                        std::hint::black_box(out.score);
                    }
                    let dt = t0.elapsed();
                    if dt >= Duration::from_millis(30) {
                        best = best.min(dt.as_secs_f64() / reps as f64);
                        break;
                    }
                    reps *= 2;
                }
            }
            points.push(((n as f64).ln(), best.ln()));
        }
        // Least-squares slope in log-log space.
        let k = points.len() as f64;
        let sx: f64 = points.iter().map(|(x, _)| x).sum();
        let sy: f64 = points.iter().map(|(_, y)| y).sum();
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        check!(
            slope < 1.3,
            "log-log slope {slope:.3} >= 1.3 over N in {lengths:?}"
        );
        Ok(format!("log-log slope {slope:.3}"))
    });
}
