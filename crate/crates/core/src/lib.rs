//! Desk-scale pivot-cascade machine translation.
//!
//! Two independently trained translation systems (source→pivot and
//! pivot→target) are chained at inference time. The crate contains every
//! piece needed to build such a cascade from plain parallel text:
//!
//! * [`text`]: tokenization, Spanish contraction/enclitic splitting,
//!   length filtering and corpus statistics;
//! * [`subword`]: byte-pair-encoding vocabularies, shared or per language;
//! * [`transformer`]: a small double-precision Transformer encoder-decoder
//!   with hand-written gradients, Adam, greedy and beam search;
//! * [`cascade`]: system training and the two-stage pipeline;
//! * [`metrics`]: case-sensitive corpus BLEU;
//! * [`cli`]: the `pivotmt` command-line front end.

pub mod cascade;
pub mod cli;
pub mod error;
pub mod io_util;
pub mod metrics;
pub mod subword;
pub mod text;
pub mod transformer;

pub use cascade::{CascadePipeline, DecodeSettings, TrainConfig, TranslationSystem, VocabSpec};
pub use error::{Error, Result};
pub use metrics::{bleu, BleuReport};
pub use subword::{SubwordVocab, VocabMode};
pub use text::{CorpusRules, CorpusStats, Lang, ParallelCorpus, RuleSet, Sentence, Token};
pub use transformer::{ModelConfig, Parameters};
