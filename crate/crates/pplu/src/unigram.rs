//! Unigram model: the context-free distribution used to normalize PPL into
//! PPLu.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{TokenId, TokenSet, TokenizedCorpus, Vocabulary};
use crate::math::logsumexp;
use crate::{Error, Result};

/// A context-free token distribution in natural-log space.
///
/// Implementations must keep `exp(log_unigram)` summed over the vocabulary
/// equal to 1. Out-of-range ids are a caller bug and may panic.
pub trait UnigramSource {
    fn vocab_size(&self) -> usize;

    /// `ln P(token)`. May be `-inf` when the source is unsmoothed.
    fn log_unigram(&self, token: TokenId) -> f64;

    /// `ln` of the total probability of a set of tokens.
    fn log_unigram_set(&self, set: &TokenSet) -> f64 {
        let terms: Vec<f64> = set.iter().map(|id| self.log_unigram(id)).collect();
        logsumexp(&terms)
    }
}

/// Additively smoothed unigram distribution estimated from token occurrence
/// counts (end-of-sentence markers included).
///
/// `P(k) = (count[k] + alpha) / (total + alpha * vocab_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel {
    counts: Vec<u64>,
    total: u64,
    alpha: f64,
}

/// Counts every token occurrence in the corpus. The corpus this runs on is
/// the model's training data; the resulting normalizer stays fixed at test
/// time. `alpha = 1` (the recommended default) keeps every token's
/// probability finite; `alpha = 0` gives the raw relative frequencies used by
/// the exact-theory checks.
pub fn count_unigrams(corpus: &TokenizedCorpus, alpha: f64) -> Result<UnigramModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::parameter("alpha", "must be non-negative"));
    }
    let mut counts = vec![0u64; corpus.vocab_size()];
    for sentence in corpus.sentences() {
        for &id in sentence {
            counts[id as usize] += 1;
        }
    }
    Ok(UnigramModel {
        counts,
        total: corpus.token_count() as u64,
        alpha,
    })
}

impl UnigramModel {
    /// Builds a model directly from per-id counts.
    pub fn from_counts(counts: Vec<u64>, alpha: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::parameter("alpha", "must be non-negative"));
        }
        let total = counts.iter().sum();
        Ok(UnigramModel {
            counts,
            total,
            alpha,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, token: TokenId) -> u64 {
        self.counts[token as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn log_denominator(&self) -> f64 {
        (self.total as f64 + self.alpha * self.counts.len() as f64).ln()
    }

    /// Natural-log probability of a token.
    ///
    /// Errors on out-of-range ids, and on zero-probability tokens when
    /// `alpha = 0` (an unsmoothed model cannot score unseen tokens).
    pub fn logprob(&self, token: TokenId) -> Result<f64> {
        if (token as usize) >= self.counts.len() {
            return Err(Error::TokenOutOfRange {
                token,
                vocab_size: self.counts.len(),
            });
        }
        if self.alpha == 0.0 && self.counts[token as usize] == 0 {
            return Err(Error::UnseenUnsmoothed(token));
        }
        Ok(self.log_unigram(token))
    }

    /// Linear-space probability of a token; same error conditions as
    /// [`UnigramModel::logprob`].
    pub fn prob(&self, token: TokenId) -> Result<f64> {
        self.logprob(token).map(f64::exp)
    }

    /// Writes the counts file format: `token<TAB>count`, one line per id, in
    /// id order.
    pub fn write_counts<W: Write>(&self, vocab: &Vocabulary, mut w: W) -> Result<()> {
        if vocab.size() != self.counts.len() {
            return Err(Error::parameter(
                "vocab",
                "vocabulary size does not match count table",
            ));
        }
        for (id, count) in self.counts.iter().enumerate() {
            writeln!(w, "{}\t{}", vocab.token(id as TokenId), count)?;
        }
        Ok(())
    }

    pub fn save_counts(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(crate::fsio::create(path)?);
        self.write_counts(vocab, &mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads the counts file format back against the same vocabulary,
    /// validating that tokens appear in id order.
    pub fn read_counts<R: BufRead>(r: R, vocab: &Vocabulary, alpha: f64) -> Result<Self> {
        let mut counts = vec![0u64; vocab.size()];
        let mut seen = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (token, count) = line.split_once('\t').ok_or_else(|| {
                Error::format("counts", format!("line {lineno}: missing tab separator"))
            })?;
            if lineno >= vocab.size() {
                return Err(Error::format(
                    "counts",
                    format!("more rows than vocabulary entries ({})", vocab.size()),
                ));
            }
            if vocab.token(lineno as TokenId) != token {
                return Err(Error::format(
                    "counts",
                    format!(
                        "line {lineno}: token {:?} does not match vocabulary entry {:?}",
                        token,
                        vocab.token(lineno as TokenId)
                    ),
                ));
            }
            counts[lineno] = count.parse().map_err(|_| {
                Error::format("counts", format!("line {lineno}: bad count {count:?}"))
            })?;
            seen += 1;
        }
        if seen != vocab.size() {
            return Err(Error::format(
                "counts",
                format!("expected {} rows, found {seen}", vocab.size()),
            ));
        }
        UnigramModel::from_counts(counts, alpha)
    }

    pub fn load_counts(path: &Path, vocab: &Vocabulary, alpha: f64) -> Result<Self> {
        Self::read_counts(BufReader::new(crate::fsio::open(path)?), vocab, alpha)
    }
}

impl UnigramSource for UnigramModel {
    fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    fn log_unigram(&self, token: TokenId) -> f64 {
        // ln(c + a) - ln(T + aV); the same expression the order-1 n-gram
        // component uses, so a degenerate order-1 model reproduces these
        // values bit for bit.
        (self.counts[token as usize] as f64 + self.alpha).ln() - self.log_denominator()
    }

    fn log_unigram_set(&self, set: &TokenSet) -> f64 {
        let sum: u64 = set.iter().map(|id| self.counts[id as usize]).sum();
        (sum as f64 + self.alpha * set.len() as f64).ln() - self.log_denominator()
    }
}
