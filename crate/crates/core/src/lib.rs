//! Constituency parsing as tagging, end to end except the learner.
//!
//! The pipeline has three steps. A *linearizer* turns each derivation tree
//! into a sequence of shift/reduce tags under a pre-, post-, or in-order
//! traversal. A learner (out of scope here; any model that emits per-slot
//! scores) scores the tags, communicating through score-table files. A
//! *decoder* searches the valid tag sequences for the best-scoring one and
//! rebuilds the tree.
//!
//! On top of that the crate carries the structural machinery around the
//! pipeline: right- and left-corner transforms with the map/merge functions
//! tying bottom-up and top-down shift–reduce tagging to in-order tagging,
//! tag/word alignment with the deviation metric, stack-depth statistics, and
//! bracket-F1 evaluation.
//!
//! ```
//! use treeline::prelude::*;
//!
//! let tree = parse_bracketed("(S (PRP She) (VP (V enjoys) (VP (V reading) (N papers))))")
//!     .unwrap()
//!     .remove(0);
//! let tags = linearize(&tree, Scheme::In).unwrap();
//! assert_eq!(tags.to_string(), "sl rl:S sl rr:VP sl rr:VP sr");
//! ```

pub mod align;
pub mod decode;
pub mod eval;
pub mod linearize;
pub mod score;
pub mod synth;
pub mod transform;
pub mod treebank;
pub mod verify;

pub mod prelude {
    pub use crate::align::{deviation_histogram, deviation_profile, paired_alignment};
    pub use crate::decode::{
        beam_decode, brute_force_decode, dp_decode, dp_decode_dependent, DecodeError, Decoded,
        DecoderConfig, DecoderState,
    };
    pub use crate::eval::{
        bracket_prf, corpus_prf, coverage_curve, pearson, required_stack_depth, EvalbConfig,
    };
    pub use crate::linearize::{
        check_validity, linearize, sr_actions, tags_to_tree, Scheme, Tag, TagSequence,
    };
    pub use crate::score::{
        build_tag_vocab, oracle_scores, perturbed_scores, read_scores, sequence_log_prob,
        tree_log_score, write_scores, DependencyMode, ScoreTable, TagVocab,
    };
    pub use crate::transform::{classify_rule_shape, left_corner, right_corner, SlashLabel};
    pub use crate::treebank::{
        binarize, collapse_unaries, debinarize, expand_unaries, format_bracketed, parse_bracketed,
        ParseTree,
    };
}
