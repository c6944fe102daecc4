//! Seeded synthetic corpus generator.
//!
//! Tokens are drawn from a Zipf marginal over a synthetic vocabulary
//! (`w1` is the most probable, `w2` next, ...). Context dependence is
//! controlled by `bigram_coherence`: with that probability a token repeats
//! its predecessor instead of being drawn fresh, which leaves the unigram
//! marginal exactly Zipf at every position while making tokens predictable
//! from context. Coherence 0 therefore yields independent tokens (average
//! pointwise mutual information near zero); higher values yield corpora a
//! context model genuinely beats a unigram model on.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the generator. Everything is seeded, so the same config
/// always emits the same corpus byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusGenConfig {
    /// Number of distinct token types (`w1` .. `w<vocab_size>`).
    pub vocab_size: usize,
    /// Exact number of whitespace tokens written to the corpus.
    pub token_count: usize,
    /// Zipf exponent: P(rank r) proportional to r^(-exponent). Must be > 0.
    pub zipf_exponent: f64,
    /// Probability in [0, 1] that a token repeats its predecessor.
    pub bigram_coherence: f64,
    pub seed: u64,
    /// Sentence lengths are uniform in `min_sentence_len..=max_sentence_len`.
    pub min_sentence_len: usize,
    pub max_sentence_len: usize,
}

impl Default for CorpusGenConfig {
    fn default() -> Self {
        CorpusGenConfig {
            vocab_size: 2000,
            token_count: 100_000,
            zipf_exponent: 1.0,
            bigram_coherence: 0.5,
            seed: 0,
            min_sentence_len: 8,
            max_sentence_len: 24,
        }
    }
}

impl CorpusGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 {
            return Err(Error::parameter("vocab_size", "must be positive"));
        }
        if self.token_count == 0 {
            return Err(Error::parameter("token_count", "must be positive"));
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent <= 0.0 {
            return Err(Error::parameter("zipf_exponent", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.bigram_coherence) {
            return Err(Error::parameter("bigram_coherence", "must be in [0, 1]"));
        }
        if self.min_sentence_len == 0 || self.min_sentence_len > self.max_sentence_len {
            return Err(Error::parameter(
                "min_sentence_len",
                "need 0 < min_sentence_len <= max_sentence_len",
            ));
        }
        Ok(())
    }
}

/// Name of the synthetic token at a zero-based Zipf rank: `w1` is the most
/// frequent type.
pub fn token_name(rank: usize) -> String {
    format!("w{}", rank + 1)
}

/// The target Zipf marginal: `probs[r]` is the probability of the token at
/// zero-based rank `r`.
pub fn zipf_probabilities(vocab_size: usize, exponent: f64) -> Vec<f64> {
    let mut probs: Vec<f64> = (1..=vocab_size)
        .map(|r| (r as f64).powf(-exponent))
        .collect();
    let norm: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= norm;
    }
    probs
}

struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    fn new(probs: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in probs {
            acc += p;
            cumulative.push(acc);
        }
        ZipfSampler { cumulative }
    }

    fn sample(&self, rng: &mut Pcg64Mcg) -> usize {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }
}

/// Generates the corpus as lines of whitespace-separated tokens. The total
/// token count is exactly `token_count`; the last sentence is trimmed to
/// make it so.
pub fn generate_corpus_lines(config: &CorpusGenConfig) -> Result<Vec<String>> {
    config.validate()?;
    let probs = zipf_probabilities(config.vocab_size, config.zipf_exponent);
    let sampler = ZipfSampler::new(&probs);
    let mut rng = Pcg64Mcg::seed_from_u64(config.seed);
    let mut lines = Vec::new();
    let mut remaining = config.token_count;
    while remaining > 0 {
        let len = rng
            .random_range(config.min_sentence_len..=config.max_sentence_len)
            .min(remaining);
        let mut words = Vec::with_capacity(len);
        let mut prev = sampler.sample(&mut rng);
        words.push(token_name(prev));
        for _ in 1..len {
            let repeat =
                config.bigram_coherence > 0.0 && rng.random::<f64>() < config.bigram_coherence;
            if !repeat {
                prev = sampler.sample(&mut rng);
            }
            words.push(token_name(prev));
        }
        remaining -= len;
        lines.push(words.join(" "));
    }
    Ok(lines)
}

/// Writes the generated corpus to a file in the corpus text format.
pub fn write_corpus(config: &CorpusGenConfig, path: &Path) -> Result<()> {
    let lines = generate_corpus_lines(config)?;
    let mut w = BufWriter::new(crate::fsio::create(path)?);
    for line in &lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
