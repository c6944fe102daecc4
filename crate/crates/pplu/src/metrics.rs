//! PPL and PPLu scoring, token-pooled corpus aggregates, and the
//! mutual-information reading of `ln PPLu`.
//!
//! All perplexities use the natural base: `PPL = exp(-lm_logprob / T)` and
//! `PPLu = exp(-(lm_logprob - uni_logprob) / T)`. Corpus-level values pool
//! tokens (one geometric mean over every token of every sentence) rather
//! than averaging per-sentence perplexities, so duplicating a sentence
//! changes nothing.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{TokenId, TokenizedCorpus};
use crate::math::Sum;
use crate::ngram::LanguageModel;
use crate::unigram::UnigramSource;
use crate::{Error, Result};

/// Version tag embedded in the scores JSONL summary record.
pub const SCORES_FORMAT_VERSION: u32 = 1;
const SCORES_FORMAT_NAME: &str = "pplu-scores";

/// Per-sentence metric record.
///
/// Invariants (each checkable from the fields): `ppl = exp(-lm_logprob /
/// length)`, `pplu = exp(-(lm_logprob - uni_logprob) / length)`, and hence
/// `pplu` equals `ppl` divided by the sentence's unigram perplexity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub sentence_id: usize,
    /// Token count including the end-of-sentence marker.
    pub length: usize,
    /// `sum_t ln P(w_t | w_{1:t-1})`.
    pub lm_logprob: f64,
    /// `sum_t ln P_uni(w_t)`.
    pub uni_logprob: f64,
    pub ppl: f64,
    pub pplu: f64,
}

/// Token-pooled corpus metrics plus the per-sentence breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusScore {
    pub ppl: f64,
    pub pplu: f64,
    pub token_count: usize,
    pub sentences: Vec<SentenceScore>,
}

/// Empirical estimate of the average pointwise mutual information between a
/// token and its context, which is exactly `-E[ln PPLu]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiSummary {
    pub mean_log_pplu: f64,
    pub mean_pmi: f64,
    pub token_count: usize,
}

/// Scores one sentence under a language model and a unigram normalizer.
///
/// Both log-probability sums run over every token including the trailing
/// end-of-sentence marker, with compensated summation. Errors on empty
/// sentences, on ids outside either model's vocabulary, and on tokens either
/// model assigns zero probability (only possible without smoothing).
pub fn score_sentence<L, U>(
    lm: &L,
    uni: &U,
    sentence: &[TokenId],
    sentence_id: usize,
) -> Result<SentenceScore>
where
    L: LanguageModel + ?Sized,
    U: UnigramSource + ?Sized,
{
    if sentence.is_empty() {
        return Err(Error::EmptySentence);
    }
    let limit = lm.vocab_size().min(uni.vocab_size());
    let mut lm_sum = Sum::new();
    let mut uni_sum = Sum::new();
    for (t, &token) in sentence.iter().enumerate() {
        if (token as usize) >= limit {
            return Err(Error::TokenOutOfRange {
                token,
                vocab_size: limit,
            });
        }
        let lm_term = lm.cond_logprob(&sentence[..t], token);
        let uni_term = uni.log_unigram(token);
        if !lm_term.is_finite() || !uni_term.is_finite() {
            return Err(Error::ZeroProbability { token, position: t });
        }
        lm_sum.add(lm_term);
        uni_sum.add(uni_term);
    }
    Ok(SentenceScore::from_logprobs(
        sentence_id,
        sentence.len(),
        lm_sum.value(),
        uni_sum.value(),
    ))
}

impl SentenceScore {
    /// Finalizes a score from accumulated log-probability sums.
    pub fn from_logprobs(
        sentence_id: usize,
        length: usize,
        lm_logprob: f64,
        uni_logprob: f64,
    ) -> Self {
        let t = length as f64;
        SentenceScore {
            sentence_id,
            length,
            lm_logprob,
            uni_logprob,
            ppl: (-lm_logprob / t).exp(),
            pplu: (-(lm_logprob - uni_logprob) / t).exp(),
        }
    }
}

/// Scores every sentence and pools all tokens into corpus-level PPL and
/// PPLu.
pub fn score_corpus<L, U>(lm: &L, uni: &U, corpus: &TokenizedCorpus) -> Result<CorpusScore>
where
    L: LanguageModel + ?Sized,
    U: UnigramSource + ?Sized,
{
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let scores: Result<Vec<SentenceScore>> = corpus
        .sentences()
        .iter()
        .enumerate()
        .map(|(id, s)| score_sentence(lm, uni, s, id))
        .collect();
    CorpusScore::from_sentences(scores?)
}

impl CorpusScore {
    /// Pools per-sentence scores into token-weighted corpus metrics.
    pub fn from_sentences(sentences: Vec<SentenceScore>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut lm_sum = Sum::new();
        let mut uni_sum = Sum::new();
        let mut tokens = 0usize;
        for s in &sentences {
            lm_sum.add(s.lm_logprob);
            uni_sum.add(s.uni_logprob);
            tokens += s.length;
        }
        let t = tokens as f64;
        Ok(CorpusScore {
            ppl: (-lm_sum.value() / t).exp(),
            pplu: (-(lm_sum.value() - uni_sum.value()) / t).exp(),
            token_count: tokens,
            sentences,
        })
    }
}

/// Averages the per-token log-ratio over all scored tokens.
///
/// `mean_log_pplu` is the token-pooled `ln PPLu`; `mean_pmi` is its exact
/// negation, computed from the same accumulation, and estimates the mutual
/// information between a token and its preceding context. Zero means the
/// model adds nothing beyond word frequency.
pub fn pmi_summary(scores: &[SentenceScore]) -> Result<PmiSummary> {
    if scores.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut diff = Sum::new();
    let mut tokens = 0usize;
    for s in scores {
        diff.add(s.lm_logprob - s.uni_logprob);
        tokens += s.length;
    }
    let mean_pmi = diff.value() / tokens as f64;
    Ok(PmiSummary {
        mean_log_pplu: -mean_pmi,
        mean_pmi,
        token_count: tokens,
    })
}

/// `|full - reduced| / full * 100`, the percentage change of a metric under
/// a reduced vocabulary relative to its full-vocabulary value.
pub fn relative_difference(full_value: f64, reduced_value: f64) -> Result<f64> {
    if !full_value.is_finite() || full_value <= 0.0 {
        return Err(Error::parameter(
            "full_value",
            format!("must be positive and finite, got {full_value}"),
        ));
    }
    Ok((full_value - reduced_value).abs() / full_value * 100.0)
}

/// Trailing summary record of a scores JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresSummary {
    pub format: String,
    pub version: u32,
    /// Base of the exponentials in every reported perplexity.
    pub log_base: String,
    pub corpus_ppl: f64,
    pub corpus_pplu: f64,
    pub sentence_count: usize,
    pub token_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl ScoresSummary {
    pub fn new(score: &CorpusScore, config: Option<serde_json::Value>) -> Self {
        ScoresSummary {
            format: SCORES_FORMAT_NAME.to_string(),
            version: SCORES_FORMAT_VERSION,
            log_base: "e".to_string(),
            corpus_ppl: score.ppl,
            corpus_pplu: score.pplu,
            sentence_count: score.sentences.len(),
            token_count: score.token_count,
            config,
        }
    }
}

/// Writes one JSON record per sentence followed by the summary record.
pub fn write_scores_jsonl<W: Write>(
    mut w: W,
    score: &CorpusScore,
    config: Option<serde_json::Value>,
) -> Result<()> {
    for s in &score.sentences {
        serde_json::to_writer(&mut w, s)?;
        writeln!(w)?;
    }
    serde_json::to_writer(&mut w, &ScoresSummary::new(score, config))?;
    writeln!(w)?;
    Ok(())
}

/// Reads a scores JSONL file back, validating the summary's format tag and
/// version.
pub fn read_scores_jsonl<R: BufRead>(r: R) -> Result<(Vec<SentenceScore>, ScoresSummary)> {
    let mut sentences = Vec::new();
    let mut summary: Option<ScoresSummary> = None;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(Error::format(
                "scores",
                "records found after the summary line",
            ));
        }
        let value: serde_json::Value = serde_json::from_str(&line)?;
        if value.get("format").is_some() {
            summary = Some(serde_json::from_value(value)?);
        } else {
            sentences.push(serde_json::from_value(value)?);
        }
    }
    let summary = summary.ok_or_else(|| Error::format("scores", "missing summary record"))?;
    if summary.format != SCORES_FORMAT_NAME {
        return Err(Error::format(
            "scores",
            format!("unexpected format tag {:?}", summary.format),
        ));
    }
    if summary.version != SCORES_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            format: "scores",
            found: summary.version,
            supported: SCORES_FORMAT_VERSION,
        });
    }
    Ok((sentences, summary))
}
