//! Browser bindings for the demo page: linearization analysis of a typed-in
//! tree, noisy decoding with live parameters, and stack-coverage curves over
//! random corpora. Each export returns a JSON string for plain-JS rendering.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use treeline::align::deviation_profile;
use treeline::decode::{beam_decode, dp_decode, DecoderConfig};
use treeline::eval::{bracket_prf, coverage_curve, required_stack_depth, EvalbConfig};
use treeline::linearize::{check_validity, linearize, initial_measure, tags_to_tree, Scheme};
use treeline::score::{build_tag_vocab, perturbed_scores};
use treeline::synth;
use treeline::transform::{left_corner, right_corner};
use treeline::treebank::{
    binarize, collapse_unaries, debinarize, expand_unaries, format_bracketed, parse_bracketed,
    ParseTree, UNARY_SEPARATOR,
};

fn parse_one(text: &str) -> Result<ParseTree, String> {
    let mut trees = parse_bracketed(text).map_err(|e| e.to_string())?;
    if trees.len() != 1 {
        return Err(format!("expected one tree, found {}", trees.len()));
    }
    Ok(trees.remove(0))
}

fn normalize(tree: ParseTree) -> Result<ParseTree, String> {
    Ok(binarize(
        collapse_unaries(tree, UNARY_SEPARATOR).map_err(|e| e.to_string())?,
    ))
}

fn parse_scheme(name: &str) -> Result<Scheme, String> {
    name.parse()
}

#[derive(Serialize)]
struct SchemeView {
    scheme: String,
    tags: Vec<String>,
    /// Stack measure after each tag.
    profile: Vec<usize>,
    start_measure: usize,
    required_depth: usize,
    /// Per-word deviation under the paired alignment.
    deviations: Vec<usize>,
    max_deviation: usize,
    mean_deviation: f64,
}

#[derive(Serialize)]
struct TreeAnalysis {
    words: Vec<String>,
    normalized: String,
    right_corner: String,
    left_corner: String,
    schemes: Vec<SchemeView>,
}

fn analyze_inner(text: &str) -> Result<String, String> {
    let tree = normalize(parse_one(text)?)?;
    let words = tree.words().iter().map(|w| w.to_string()).collect();
    let mut schemes = Vec::new();
    for scheme in Scheme::ALL {
        let seq = linearize(&tree, scheme).map_err(|e| e.to_string())?;
        let report = check_validity(&seq.tags, scheme);
        let profile = deviation_profile(&tree, scheme).map_err(|e| e.to_string())?;
        schemes.push(SchemeView {
            scheme: scheme.to_string(),
            tags: seq.tags.iter().map(|t| t.to_string()).collect(),
            profile: report.profile,
            start_measure: initial_measure(scheme),
            required_depth: required_stack_depth(&tree, scheme).map_err(|e| e.to_string())?,
            deviations: profile.deviations,
            max_deviation: profile.max,
            mean_deviation: profile.mean,
        });
    }
    let analysis = TreeAnalysis {
        words,
        normalized: format_bracketed(&tree),
        right_corner: format_bracketed(&right_corner(&tree).map_err(|e| e.to_string())?),
        left_corner: format_bracketed(&left_corner(&tree).map_err(|e| e.to_string())?),
        schemes,
    };
    serde_json::to_string(&analysis).map_err(|e| e.to_string())
}

/// Linearize a bracketed tree under all three schemes, with stack profiles
/// and word deviations.
#[wasm_bindgen]
pub fn analyze_tree(text: &str) -> Result<String, JsValue> {
    analyze_inner(text).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct DecodeResult {
    decoder: String,
    tags: Vec<String>,
    tree: String,
    valid: bool,
    exact_match: bool,
    f1: f64,
    score: f64,
}

#[derive(Serialize)]
struct NoisyDecode {
    gold_tags: Vec<String>,
    results: Vec<DecodeResult>,
}

fn decode_noisy_inner(
    text: &str,
    scheme: &str,
    sigma: f64,
    seed: u64,
    beam_size: usize,
) -> Result<String, String> {
    let original = parse_one(text)?;
    let scheme = parse_scheme(scheme)?;
    let tree = normalize(original.clone())?;
    let vocab = build_tag_vocab(std::slice::from_ref(&tree), scheme).map_err(|e| e.to_string())?;
    let table =
        perturbed_scores(&tree, scheme, &vocab, sigma.max(0.0), seed).map_err(|e| e.to_string())?;
    let leaves: Vec<(String, String)> = tree
        .leaves()
        .into_iter()
        .map(|(p, w)| (p.to_string(), w.to_string()))
        .collect();
    let d = required_stack_depth(&tree, scheme).map_err(|e| e.to_string())?.max(2);
    let gold_tags = linearize(&tree, scheme).map_err(|e| e.to_string())?;

    let mut results = Vec::new();
    let decoded = [
        ("exact dp", dp_decode(&table, &DecoderConfig::dp(scheme, d))),
        (
            "beam",
            beam_decode(&table, &DecoderConfig::beam(scheme, d, beam_size.max(1))),
        ),
    ];
    for (name, outcome) in decoded {
        let out = outcome.map_err(|e| e.to_string())?;
        let rebuilt = tags_to_tree(&out.tags.tags, &leaves, scheme).map_err(|e| e.to_string())?;
        let denorm = expand_unaries(
            debinarize(rebuilt).map_err(|e| e.to_string())?,
            UNARY_SEPARATOR,
        );
        let (_, _, f1) =
            bracket_prf(&original, &denorm, &EvalbConfig::default()).map_err(|e| e.to_string())?;
        results.push(DecodeResult {
            decoder: name.to_string(),
            tags: out.tags.tags.iter().map(|t| t.to_string()).collect(),
            tree: format_bracketed(&denorm),
            valid: check_validity(&out.tags.tags, scheme).valid,
            exact_match: denorm == original,
            f1,
            score: out.score,
        });
    }
    serde_json::to_string(&NoisyDecode {
        gold_tags: gold_tags.tags.iter().map(|t| t.to_string()).collect(),
        results,
    })
    .map_err(|e| e.to_string())
}

/// Perturb the tree's one-hot scores with Gaussian noise and decode them
/// back, exactly and with a beam.
#[wasm_bindgen]
pub fn decode_with_noise(
    text: &str,
    scheme: &str,
    sigma: f64,
    seed: u64,
    beam_size: usize,
) -> Result<String, JsValue> {
    decode_noisy_inner(text, scheme, sigma, seed, beam_size).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct CoverageView {
    scheme: String,
    /// (stack depth, fraction of trees linearizable within it).
    curve: Vec<(usize, f64)>,
    mean_deviation: f64,
}

fn coverage_inner(num_trees: usize, max_len: usize, skew: f64, seed: u64) -> Result<String, String> {
    let num_trees = num_trees.clamp(1, 2000);
    let max_len = max_len.clamp(2, 60);
    let mut rng = synth::rng(seed);
    let corpus: Vec<ParseTree> = (0..num_trees)
        .map(|i| {
            let n = 2 + i % (max_len - 1);
            synth::skewed_tree(&mut rng, n, skew.clamp(0.0, 1.0))
        })
        .collect();
    let mut views = Vec::new();
    for scheme in Scheme::ALL {
        let curve = coverage_curve(&corpus, scheme).map_err(|e| e.to_string())?;
        let mut words = 0usize;
        let mut total = 0usize;
        for tree in &corpus {
            let profile = deviation_profile(tree, scheme).map_err(|e| e.to_string())?;
            words += profile.deviations.len();
            total += profile.deviations.iter().sum::<usize>();
        }
        views.push(CoverageView {
            scheme: scheme.to_string(),
            curve,
            mean_deviation: total as f64 / words.max(1) as f64,
        });
    }
    serde_json::to_string(&views).map_err(|e| e.to_string())
}

/// Stack-coverage curves and mean deviations over a random corpus whose
/// branching skew the caller controls (0 = left-branching, 1 = right).
#[wasm_bindgen]
pub fn coverage_curves(
    num_trees: usize,
    max_len: usize,
    skew: f64,
    seed: u64,
) -> Result<String, JsValue> {
    coverage_inner(num_trees, max_len, skew, seed).map_err(|e| JsValue::from_str(&e))
}
