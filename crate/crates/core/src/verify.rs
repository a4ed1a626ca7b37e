//! Seeded property suites behind the `verify` command: linearization
//! roundtrips, the corner-transform equivalences, and decoder exactness
//! against the exhaustive oracle.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::decode::{brute_force_decode, dp_decode, dp_decode_dependent, DecoderConfig};
use crate::linearize::{linearize, map_merge_lc, map_merge_rc, sr_actions, tags_to_tree, Scheme};
use crate::score::{DependencyMode, TagVocab};
use crate::synth;
use crate::transform::{left_corner, right_corner};
use crate::treebank::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Roundtrip,
    RcEquiv,
    LcEquiv,
    DpOracle,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::Roundtrip,
        Property::RcEquiv,
        Property::LcEquiv,
        Property::DpOracle,
    ];
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Roundtrip => "roundtrip",
            Property::RcEquiv => "rc-equiv",
            Property::LcEquiv => "lc-equiv",
            Property::DpOracle => "dp-oracle",
        })
    }
}

impl FromStr for Property {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roundtrip" => Ok(Property::Roundtrip),
            "rc-equiv" => Ok(Property::RcEquiv),
            "lc-equiv" => Ok(Property::LcEquiv),
            "dp-oracle" => Ok(Property::DpOracle),
            other => Err(format!(
                "unknown property `{other}` (expected roundtrip, rc-equiv, lc-equiv, or dp-oracle)"
            )),
        }
    }
}

/// Outcome of a trial run: passes out of trials, plus the first failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub passed: usize,
    pub trials: usize,
    pub first_failure: Option<String>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }

    fn collect(results: impl Iterator<Item = Result<(), String>>) -> Outcome {
        let mut passed = 0;
        let mut trials = 0;
        let mut first_failure = None;
        for r in results {
            trials += 1;
            match r {
                Ok(()) => passed += 1,
                Err(msg) => {
                    if first_failure.is_none() {
                        first_failure = Some(msg);
                    }
                }
            }
        }
        Outcome { passed, trials, first_failure }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} pass", self.passed, self.trials)
    }
}

pub fn run(property: Property, trials: usize, seed: u64) -> Outcome {
    match property {
        Property::Roundtrip => roundtrip(trials, seed),
        Property::RcEquiv => rc_equivalence(trials, seed),
        Property::LcEquiv => lc_equivalence(trials, seed),
        Property::DpOracle => dp_oracle(trials, seed),
    }
}

fn owned_leaves(tree: &ParseTree) -> Vec<(String, String)> {
    tree.leaves()
        .into_iter()
        .map(|(p, w)| (p.to_string(), w.to_string()))
        .collect()
}

/// tags_to_tree inverts linearize on random binary trees, all schemes.
pub fn roundtrip(trials: usize, seed: u64) -> Outcome {
    let mut rng = synth::rng(seed);
    Outcome::collect((0..trials).map(|i| {
        let n = rng.random_range(1..=40);
        let tree = synth::random_binary_tree(&mut rng, n);
        let leaves = owned_leaves(&tree);
        for scheme in Scheme::ALL {
            let seq = linearize(&tree, scheme).map_err(|e| format!("trial {i}: {e}"))?;
            if seq.len() != 2 * n - 1 {
                return Err(format!("trial {i}: {scheme} length {} != 2N-1", seq.len()));
            }
            let back = tags_to_tree(&seq.tags, &leaves, scheme)
                .map_err(|e| format!("trial {i}: {scheme}: {e}"))?;
            if back != tree {
                return Err(format!("trial {i}: {scheme} roundtrip mismatch"));
            }
        }
        Ok(())
    }))
}

/// Post-order actions over the right-corner transform map/merge onto the
/// in-order linearization.
pub fn rc_equivalence(trials: usize, seed: u64) -> Outcome {
    let mut rng = synth::rng(seed);
    Outcome::collect((0..trials).map(|i| {
        let n = rng.random_range(1..=30);
        let tree = synth::random_binary_tree(&mut rng, n);
        let rc = right_corner(&tree).map_err(|e| format!("trial {i}: {e}"))?;
        let actions = sr_actions(&rc, Scheme::Post).map_err(|e| format!("trial {i}: {e}"))?;
        let merged = map_merge_rc(&actions).map_err(|e| format!("trial {i}: {e}"))?;
        let tetra = linearize(&tree, Scheme::In).map_err(|e| format!("trial {i}: {e}"))?;
        if merged != tetra {
            return Err(format!("trial {i}: rc map/merge disagrees with tetratags"));
        }
        Ok(())
    }))
}

/// Pre-order actions over the left-corner transform map/merge (with root
/// normalization) onto the in-order linearization.
pub fn lc_equivalence(trials: usize, seed: u64) -> Outcome {
    let mut rng = synth::rng(seed);
    Outcome::collect((0..trials).map(|i| {
        let n = rng.random_range(1..=30);
        let tree = synth::random_binary_tree(&mut rng, n);
        let lc = left_corner(&tree).map_err(|e| format!("trial {i}: {e}"))?;
        let actions = sr_actions(&lc, Scheme::Pre).map_err(|e| format!("trial {i}: {e}"))?;
        let merged = map_merge_lc(&actions).map_err(|e| format!("trial {i}: {e}"))?;
        let tetra = linearize(&tree, Scheme::In).map_err(|e| format!("trial {i}: {e}"))?;
        if merged != tetra {
            return Err(format!("trial {i}: lc map/merge disagrees with tetratags"));
        }
        Ok(())
    }))
}

/// The dynamic programs match the exhaustive oracle in score and sequence on
/// small random tables, independent and dependent modes alike.
pub fn dp_oracle(trials: usize, seed: u64) -> Outcome {
    let mut rng = synth::rng(seed);
    let vocab = TagVocab::with_labels(["S", "NP", "VP"]);
    Outcome::collect((0..trials).map(|i| {
        let n = rng.random_range(2..=4);
        let scheme = Scheme::ALL[rng.random_range(0..3)];
        let table = synth::random_table(&mut rng, scheme, n, &vocab);
        let exact =
            dp_decode(&table, &DecoderConfig::dp(scheme, n)).map_err(|e| format!("trial {i}: {e}"))?;
        let oracle =
            brute_force_decode(&table, scheme, n).map_err(|e| format!("trial {i}: {e}"))?;
        if (exact.score - oracle.score).abs() > 1e-9 || exact.tags != oracle.tags {
            return Err(format!("trial {i}: dp disagrees with brute force ({scheme}, n={n})"));
        }
        let (dep_scheme, mode) = if rng.random_range(0..2) == 0 {
            (Scheme::Pre, DependencyMode::LeftDep)
        } else {
            (Scheme::Post, DependencyMode::RightDep)
        };
        let table = synth::random_dependent_table(&mut rng, dep_scheme, n, &vocab, mode);
        let exact = dp_decode_dependent(&table, &DecoderConfig::dependent(dep_scheme, mode, n))
            .map_err(|e| format!("trial {i}: {e}"))?;
        let oracle =
            brute_force_decode(&table, dep_scheme, n).map_err(|e| format!("trial {i}: {e}"))?;
        if (exact.score - oracle.score).abs() > 1e-9 || exact.tags != oracle.tags {
            return Err(format!(
                "trial {i}: dependent dp disagrees with brute force ({dep_scheme}, n={n})"
            ));
        }
        Ok(())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_properties_pass_a_small_run() {
        for property in Property::ALL {
            let outcome = run(property, 25, 99);
            assert!(
                outcome.all_passed(),
                "{property}: {:?}",
                outcome.first_failure
            );
        }
    }

    #[test]
    fn outcome_formats_as_a_pass_count() {
        let outcome = Outcome { passed: 10, trials: 10, first_failure: None };
        assert_eq!(outcome.to_string(), "10/10 pass");
    }
}
