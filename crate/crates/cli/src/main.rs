//! Batch command-line interface: linearize treebanks, decode score files,
//! measure deviation and stack statistics, score predictions, transform
//! trees, and run the property suites.
//!
//! Exit codes: 0 on success, 1 on domain errors (bad data, impossible
//! decodes), 2 on usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use treeline::align::{deviation_histogram, deviation_profile};
use treeline::decode::{beam_decode, dp_decode, dp_decode_dependent, DecoderConfig};
use treeline::eval::{corpus_max_stack, corpus_prf, corpus_report, coverage_curve, round2, EvalbConfig};
use treeline::linearize::{
    format_tag_line, linearize, linearize_with_preterminals, tags_to_tree, Scheme,
};
use treeline::score::{
    build_tag_vocab, oracle_scores, perturbed_scores, read_scores, to_json_line, ScoreTable,
};
use treeline::transform::{left_corner, right_corner};
use treeline::treebank::{
    binarize, collapse_unaries, debinarize, expand_unaries, format_bracketed, parse_bracketed,
    ParseTree, UNARY_SEPARATOR,
};
use treeline::verify::{run as run_property, Property};

#[derive(Parser)]
#[command(name = "treeline", version, about = "Constituency parsing as tagging")]
struct Cli {
    /// Worker threads for per-sentence work; output order is preserved.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

fn parse_property(s: &str) -> Result<Property, String> {
    s.parse()
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecodeMode {
    Dp,
    DpDep,
    Beam,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CornerDirection {
    Rc,
    Lc,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize trees (collapse unaries, binarize) and write tag lines.
    Linearize {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Append the preterminal to shift tags.
        #[arg(long)]
        encode_pos: bool,
    },
    /// Decode a score file into bracketed trees.
    Decode(DecodeArgs),
    /// Report word-level deviation statistics for a treebank.
    Deviation {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        input: PathBuf,
        /// Also write a `deviation,count` CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Write the stack-depth coverage curve of a treebank.
    #[command(name = "stack-stats")]
    StackStats {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Bracket precision/recall/F1 of predictions against gold trees.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Write a per-sentence TSV report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Corner-transform normalized trees into slash-category form.
    Transform {
        #[arg(long)]
        direction: CornerDirection,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Emit one-hot (optionally noised) score tables for a treebank.
    #[command(name = "oracle-scores")]
    OracleScores {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Gaussian noise stddev added to the floored one-hot scores.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a seeded property suite and print its pass count.
    Verify {
        #[arg(long, value_parser = parse_property)]
        property: Property,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[arg(long, value_enum, default_value_t = DecodeMode::Dp)]
    mode: DecodeMode,
    /// Beam width for `--mode beam`.
    #[arg(long, default_value_t = 10)]
    beam_size: usize,
    /// Stack bound; defaults to the sentence length (or the gold corpus
    /// maximum when --gold is given).
    #[arg(long)]
    max_stack: Option<usize>,
    #[arg(long)]
    scores: PathBuf,
    /// Leaves as `preterminal<TAB>word` lines, blank line between sentences.
    #[arg(long)]
    leaves: Option<PathBuf>,
    /// Treebank whose normalized leaves to decode over.
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn read_corpus(path: &Path) -> Result<Vec<ParseTree>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut trees = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parsed = parse_bracketed(line)
            .map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))?;
        if parsed.len() != 1 {
            bail!("{}:{}: expected one tree per line", path.display(), i + 1);
        }
        trees.push(parsed.remove(0));
    }
    if trees.is_empty() {
        bail!("{}: no trees", path.display());
    }
    Ok(trees)
}

fn normalize(tree: ParseTree) -> Result<ParseTree> {
    Ok(binarize(collapse_unaries(tree, UNARY_SEPARATOR)?))
}

fn denormalize(tree: ParseTree) -> Result<ParseTree> {
    Ok(expand_unaries(debinarize(tree)?, UNARY_SEPARATOR))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut out = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Order-preserving map over sentences, parallel when --jobs asks for it.
fn map_ordered<T, U, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    if jobs <= 1 {
        items.iter().map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?;
        pool.install(|| items.par_iter().map(&f).collect())
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let jobs = cli.jobs.max(1);
    match cli.command {
        Command::Linearize { scheme, input, output, encode_pos } => {
            let trees = read_corpus(&input)?;
            let lines = map_ordered(jobs, &trees, |tree| {
                let normalized = normalize(tree.clone())?;
                let seq = if encode_pos {
                    linearize_with_preterminals(&normalized, scheme)?
                } else {
                    linearize(&normalized, scheme)?
                };
                Ok(format_tag_line(&seq.tags))
            })?;
            write_lines(&output, &lines)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode(args) => decode_command(jobs, args),
        Command::Deviation { scheme, input, histogram } => {
            let trees = read_corpus(&input)?;
            let normalized = map_ordered(jobs, &trees, |t| normalize(t.clone()))?;
            let profiles = map_ordered(jobs, &normalized, |t| {
                deviation_profile(t, scheme).map_err(Into::into)
            })?;
            let words: usize = profiles.iter().map(|p| p.deviations.len()).sum();
            let total: usize = profiles.iter().map(|p| p.deviations.iter().sum::<usize>()).sum();
            let max = profiles.iter().map(|p| p.max).max().unwrap_or(0);
            let mean = if words == 0 { 0.0 } else { total as f64 / words as f64 };
            println!("sentences\t{}", normalized.len());
            println!("words\t{words}");
            println!("mean_deviation\t{mean:.4}");
            println!("max_deviation\t{max}");
            if let Some(path) = histogram {
                let hist = deviation_histogram(&normalized, scheme, max + 1)?;
                fs::write(&path, hist.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::StackStats { scheme, input, output } => {
            let trees = read_corpus(&input)?;
            let normalized = map_ordered(jobs, &trees, |t| normalize(t.clone()))?;
            let curve = coverage_curve(&normalized, scheme)?;
            let mut csv = String::from("depth,coverage\n");
            for (depth, coverage) in &curve {
                csv.push_str(&format!("{depth},{coverage}\n"));
            }
            fs::write(&output, csv).with_context(|| format!("writing {}", output.display()))?;
            println!("max_depth\t{}", curve.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { gold, pred, report } => {
            let gold_trees = read_corpus(&gold)?;
            let pred_trees = read_corpus(&pred)?;
            let config = EvalbConfig::default();
            let (p, r, f) = corpus_prf(&gold_trees, &pred_trees, &config)?;
            println!("precision\t{:.2}", round2(p));
            println!("recall\t{:.2}", round2(r));
            println!("f1\t{:.2}", round2(f));
            if let Some(path) = report {
                let tsv = corpus_report(&gold_trees, &pred_trees, &config)?;
                fs::write(&path, tsv).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Transform { direction, input, output } => {
            let trees = read_corpus(&input)?;
            let lines = map_ordered(jobs, &trees, |tree| {
                let normalized = normalize(tree.clone())?;
                let transformed = match direction {
                    CornerDirection::Rc => right_corner(&normalized)?,
                    CornerDirection::Lc => left_corner(&normalized)?,
                };
                Ok(format_bracketed(&transformed))
            })?;
            write_lines(&output, &lines)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleScores { scheme, input, output, noise, seed } => {
            let trees = read_corpus(&input)?;
            let normalized = map_ordered(jobs, &trees, |t| normalize(t.clone()))?;
            let vocab = build_tag_vocab(&normalized, scheme)?;
            let indexed: Vec<(usize, ParseTree)> =
                normalized.into_iter().enumerate().collect();
            let lines = map_ordered(jobs, &indexed, |(i, tree)| {
                let mut table = if noise > 0.0 {
                    perturbed_scores(tree, scheme, &vocab, noise, seed.wrapping_add(*i as u64))?
                } else {
                    oracle_scores(tree, scheme, &vocab)?
                };
                table.id = (i + 1).to_string();
                to_json_line(&table).map_err(Into::into)
            })?;
            write_lines(&output, &lines)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { property, trials, seed } => {
            let outcome = run_property(property, trials, seed);
            println!("{outcome}");
            if outcome.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                if let Some(failure) = &outcome.first_failure {
                    eprintln!("first failure: {failure}");
                }
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn read_leaves_file(path: &Path) -> Result<Vec<Vec<(String, String)>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sentences = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (pre, word) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("{}:{}: expected `preterminal<TAB>word`", path.display(), i + 1))?;
        current.push((pre.to_string(), word.to_string()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        bail!("{}: no leaves", path.display());
    }
    Ok(sentences)
}

fn decode_command(jobs: usize, args: DecodeArgs) -> Result<ExitCode> {
    let tables = read_scores(&args.scores)?;
    let (leaves, gold_depth) = match (&args.leaves, &args.gold) {
        (Some(path), _) => (read_leaves_file(path)?, None),
        (None, Some(path)) => {
            let normalized: Vec<ParseTree> = read_corpus(path)?
                .into_iter()
                .map(normalize)
                .collect::<Result<_>>()?;
            let depth = corpus_max_stack(&normalized, args.scheme)?;
            let leaves = normalized
                .iter()
                .map(|t| {
                    t.leaves()
                        .into_iter()
                        .map(|(p, w)| (p.to_string(), w.to_string()))
                        .collect()
                })
                .collect();
            (leaves, Some(depth))
        }
        (None, None) => bail!("decode needs --leaves or --gold to supply the words"),
    };
    if leaves.len() != tables.len() {
        bail!(
            "score file has {} sentences but the leaves cover {}",
            tables.len(),
            leaves.len()
        );
    }
    let items: Vec<(ScoreTable, Vec<(String, String)>)> =
        tables.into_iter().zip(leaves).collect();
    let lines = map_ordered(jobs, &items, |(table, leaves)| {
        if leaves.len() != table.n {
            bail!(
                "sentence {}: score table says n={} but {} leaves given",
                table.id,
                table.n,
                leaves.len()
            );
        }
        let d = args.max_stack.or(gold_depth).unwrap_or(table.n).max(1);
        let decoded = match args.mode {
            DecodeMode::Dp => dp_decode(table, &DecoderConfig::dp(args.scheme, d))?,
            DecodeMode::DpDep => dp_decode_dependent(
                table,
                &DecoderConfig::dependent(args.scheme, table.dependency, d),
            )?,
            DecodeMode::Beam => {
                beam_decode(table, &DecoderConfig::beam(args.scheme, d, args.beam_size))?
            }
        };
        let tree = tags_to_tree(&decoded.tags.tags, leaves, args.scheme)?;
        Ok(format_bracketed(&denormalize(tree)?))
    })?;
    write_lines(&args.output, &lines)?;
    Ok(ExitCode::SUCCESS)
}
