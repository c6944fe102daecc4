//! Perplexity and unigram-normalized perplexity (PPLu) evaluation toolkit.
//!
//! The crate scores token sequences under interpolated, additively smoothed
//! n-gram language models and reports two intrinsic metrics side by side:
//!
//! * **PPL**: the usual perplexity, `exp(-1/T * sum ln P(w_t | w_{1:t-1}))`.
//! * **PPLu**: perplexity with every conditional probability divided by the
//!   token's unigram probability. PPLu measures the likelihood improvement a
//!   model gains from context, so it is far less sensitive to vocabulary size
//!   than raw PPL.
//!
//! Around the two metrics the crate provides:
//!
//! * [`corpus`]: vocabulary building with frequency cutoffs, tokenization,
//!   and vocabulary reduction (rare tokens folded into `<unk>`).
//! * [`unigram`] / [`ngram`]: the probability sources, all natural-log space.
//! * [`metrics`]: per-sentence and token-pooled corpus scores, plus the
//!   pointwise-mutual-information reading of `ln PPLu`.
//! * [`split`]: a machine-checked demonstration that PPLu is invariant when
//!   one vocabulary entry is split into two interchangeable variants, while
//!   PPL strictly inflates.
//! * [`sweep`]: evaluate one trained model under shrinking vocabularies and
//!   compare how much each metric moves.
//! * [`ranking`]: order sentences by PPL and by PPLu and quantify where the
//!   two orderings disagree.
//! * [`gen`]: a seeded Zipf corpus generator with tunable bigram dependence,
//!   so every experiment is reproducible without external data.
//!
//! Start with the runnable programs under `examples/`; each one walks through
//! a single capability end to end. The `pplu` binary exposes the same
//! pipeline as subcommands for shell use.

pub mod cli;
pub mod corpus;
pub mod gen;
pub mod math;
pub mod metrics;
pub mod ngram;
pub mod ranking;
pub mod split;
pub mod sweep;
pub mod unigram;

pub use corpus::{
    build_vocabulary, detokenize, reduce_vocabulary, tokenize, TokenId, TokenSet, TokenizedCorpus,
    Vocabulary, EOS_ID, EOS_TOKEN, RESERVED_TOKENS, UNK_ID, UNK_TOKEN,
};
pub use gen::{generate_corpus_lines, CorpusGenConfig};
pub use metrics::{
    pmi_summary, relative_difference, score_corpus, score_sentence, CorpusScore, PmiSummary,
    SentenceScore,
};
pub use ngram::{train_ngram, LanguageModel, NGramModel};
pub use ranking::{divergence_report, rank_sentences, DivergenceReport, RankRecord};
pub use split::{
    analytic_split_views, empirical_split_experiment, split_corpus, verify_invariance, SplitMode,
    SplitReport, SplitSpec,
};
pub use sweep::{run_vocab_sweep, SweepMode, SweepPoint};
pub use unigram::{count_unigrams, UnigramModel, UnigramSource};

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty sentence")]
    EmptySentence,

    #[error("token id {token} out of range for vocabulary of size {vocab_size}")]
    TokenOutOfRange { token: TokenId, vocab_size: usize },

    #[error("unseen token with unsmoothed unigram (token id {0})")]
    UnseenUnsmoothed(TokenId),

    #[error("token id {token} has zero probability at position {position}")]
    ZeroProbability { token: TokenId, position: usize },

    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("invalid interpolation weights: {0}")]
    InvalidWeights(String),

    #[error("invalid keep size: {0}")]
    InvalidKeepSize(String),

    #[error("split target not found in corpus: {0}")]
    TargetAbsent(String),

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("malformed {format} input: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error("unsupported {format} version {found} (supported: {supported})")]
    UnsupportedVersion {
        format: &'static str,
        found: u32,
        supported: u32,
    },

    #[error("{path}: {source}")]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }
}

pub(crate) mod fsio {
    use std::fs::File;
    use std::path::Path;

    use crate::{Error, Result};

    pub(crate) fn open(path: &Path) -> Result<File> {
        File::open(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub(crate) fn create(path: &Path) -> Result<File> {
        File::create(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
