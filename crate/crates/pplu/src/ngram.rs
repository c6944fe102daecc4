//! Interpolated, additively smoothed n-gram language model.
//!
//! This is the toolkit's context-dependent probability source. It mixes
//! add-alpha estimates of every order up to `n`:
//!
//! `P(w | ctx) = sum_k lambda_k * (count_k(ctx_k, w) + alpha) / (total_k(ctx_k) + alpha * |V|)`
//!
//! where `ctx_k` is the last `k - 1` context tokens, left-padded with the
//! end-of-sentence id at sentence starts. Additive smoothing is chosen over
//! backoff schemes because it normalizes exactly at every context, which the
//! metric invariance checks in [`crate::split`] and [`crate::sweep`] rely on.
//! All arithmetic is in natural-log space.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{TokenId, TokenSet, TokenizedCorpus, EOS_ID};
use crate::math::{logsumexp, Sum};
use crate::unigram::{UnigramModel, UnigramSource};
use crate::{Error, Result};

/// Version tag written at the top of model dump files.
pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "# pplu-ngram v";

/// A conditional token distribution `P(token | context)` in natural-log
/// space.
///
/// `context` is the raw sentence prefix; implementations decide how much of
/// it to use. For every fixed context, `exp(cond_logprob)` summed over the
/// vocabulary must be 1. Out-of-range token ids are a caller bug.
pub trait LanguageModel {
    fn vocab_size(&self) -> usize;

    /// `ln P(token | context)`.
    fn cond_logprob(&self, context: &[TokenId], token: TokenId) -> f64;

    /// `ln` of the total conditional probability of a set of tokens.
    fn cond_logprob_set(&self, context: &[TokenId], set: &TokenSet) -> f64 {
        let terms: Vec<f64> = set
            .iter()
            .map(|id| self.cond_logprob(context, id))
            .collect();
        logsumexp(&terms)
    }

    /// `ln P(sentence)`: the sum of conditional log-probabilities of every
    /// token given the tokens before it (the trailing end-of-sentence marker
    /// is a token like any other).
    fn sentence_logprob(&self, sentence: &[TokenId]) -> Result<f64> {
        if sentence.is_empty() {
            return Err(Error::EmptySentence);
        }
        let mut sum = Sum::new();
        for t in 0..sentence.len() {
            sum.add(self.cond_logprob(&sentence[..t], sentence[t]));
        }
        Ok(sum.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct ContextTable {
    total: u64,
    counts: HashMap<TokenId, u64>,
}

/// Trained interpolated n-gram model. Immutable once trained; scoring only
/// reads, so a model can be shared across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    vocab_size: usize,
    alpha: f64,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    /// tables[k] maps contexts of length k to their continuation counts.
    tables: Vec<HashMap<Box<[TokenId]>, ContextTable>>,
}

/// Collects all k-gram counts for `k <= order` over the corpus and fixes the
/// interpolation weights (uniform `1/order` when not given). Weights must be
/// non-negative and sum to 1 within 1e-9; `weights[i]` belongs to the
/// `(i+1)`-gram component.
pub fn train_ngram(
    corpus: &TokenizedCorpus,
    order: usize,
    alpha: f64,
    weights: Option<&[f64]>,
) -> Result<NGramModel> {
    if order < 1 {
        return Err(Error::InvalidOrder(order));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::parameter("alpha", "must be non-negative"));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let weights = match weights {
        Some(w) => validate_weights(w, order)?,
        None => vec![1.0 / order as f64; order],
    };

    let mut tables: Vec<HashMap<Box<[TokenId]>, ContextTable>> =
        (0..order).map(|_| HashMap::new()).collect();
    let mut padded: Vec<TokenId> = Vec::new();
    for sentence in corpus.sentences() {
        padded.clear();
        padded.extend(std::iter::repeat_n(EOS_ID, order - 1));
        padded.extend_from_slice(sentence);
        for (t, &token) in sentence.iter().enumerate() {
            let end = order - 1 + t;
            for (k, table) in tables.iter_mut().enumerate() {
                let ctx = &padded[end - k..end];
                match table.get_mut(ctx) {
                    Some(entry) => {
                        entry.total += 1;
                        *entry.counts.entry(token).or_insert(0) += 1;
                    }
                    None => {
                        table.insert(
                            ctx.to_vec().into_boxed_slice(),
                            ContextTable {
                                total: 1,
                                counts: HashMap::from([(token, 1)]),
                            },
                        );
                    }
                }
            }
        }
    }

    Ok(NGramModel::assemble(
        order,
        corpus.vocab_size(),
        alpha,
        weights,
        tables,
    ))
}

fn validate_weights(weights: &[f64], order: usize) -> Result<Vec<f64>> {
    if weights.len() != order {
        return Err(Error::InvalidWeights(format!(
            "expected {order} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Error::InvalidWeights(
            "weights must be non-negative".to_string(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    Ok(weights.to_vec())
}

impl NGramModel {
    fn assemble(
        order: usize,
        vocab_size: usize,
        alpha: f64,
        weights: Vec<f64>,
        tables: Vec<HashMap<Box<[TokenId]>, ContextTable>>,
    ) -> Self {
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        NGramModel {
            order,
            vocab_size,
            alpha,
            weights,
            log_weights,
            tables,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Observed count of `context -> token`, for inspection and tests.
    pub fn raw_count(&self, context: &[TokenId], token: TokenId) -> u64 {
        self.tables[context.len()]
            .get(context)
            .and_then(|t| t.counts.get(&token).copied())
            .unwrap_or(0)
    }

    /// Add-alpha log-probability of the `(ctx_len+1)`-gram component.
    fn component_logprob(&self, ctx_len: usize, context: &[TokenId], token: TokenId) -> f64 {
        let (count, total) = self.with_context(ctx_len, context, |table| match table {
            Some(t) => (t.counts.get(&token).copied().unwrap_or(0), t.total),
            None => (0, 0),
        });
        self.add_alpha(count, total)
    }

    fn component_logprob_set(&self, ctx_len: usize, context: &[TokenId], set: &TokenSet) -> f64 {
        let (count, total) = self.with_context(ctx_len, context, |table| match table {
            Some(t) => {
                // u64 sums are exact and order-independent, so iterating the
                // hash map here stays deterministic.
                let sum = t
                    .counts
                    .iter()
                    .filter(|(&id, _)| set.contains(id))
                    .map(|(_, &c)| c)
                    .sum();
                (sum, t.total)
            }
            None => (0, 0),
        });
        if self.alpha == 0.0 && (total == 0 || count == 0) {
            return f64::NEG_INFINITY;
        }
        (count as f64 + self.alpha * set.len() as f64).ln()
            - (total as f64 + self.alpha * self.vocab_size as f64).ln()
    }

    /// Resolves the effective context of length `ctx_len` (left-padding with
    /// the end-of-sentence id when the prefix is short) and looks it up.
    fn with_context<R>(
        &self,
        ctx_len: usize,
        context: &[TokenId],
        f: impl FnOnce(Option<&ContextTable>) -> R,
    ) -> R {
        let table = &self.tables[ctx_len];
        if context.len() >= ctx_len {
            f(table.get(&context[context.len() - ctx_len..]))
        } else {
            let mut buf = Vec::with_capacity(ctx_len);
            buf.extend(std::iter::repeat_n(EOS_ID, ctx_len - context.len()));
            buf.extend_from_slice(context);
            f(table.get(buf.as_slice()))
        }
    }

    fn add_alpha(&self, count: u64, total: u64) -> f64 {
        if self.alpha == 0.0 && (total == 0 || count == 0) {
            // Unsmoothed and unseen: zero mass, without tripping 0/0.
            return f64::NEG_INFINITY;
        }
        (count as f64 + self.alpha).ln() - (total as f64 + self.alpha * self.vocab_size as f64).ln()
    }

    /// Writes the versioned plain-text count dump. Entries are sorted, so
    /// identical models produce byte-identical files.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC}{MODEL_FORMAT_VERSION}")?;
        writeln!(w, "order\t{}", self.order)?;
        writeln!(w, "vocab_size\t{}", self.vocab_size)?;
        writeln!(w, "alpha\t{}", self.alpha)?;
        let weights: Vec<String> = self.weights.iter().map(|x| x.to_string()).collect();
        writeln!(w, "weights\t{}", weights.join(" "))?;
        for (k, table) in self.tables.iter().enumerate() {
            let mut entries: Vec<(&Box<[TokenId]>, &ContextTable)> = table.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            for (ctx, counts) in entries {
                let ctx_str: Vec<String> = ctx.iter().map(|id| id.to_string()).collect();
                let ctx_str = ctx_str.join(" ");
                let mut tokens: Vec<(&TokenId, &u64)> = counts.counts.iter().collect();
                tokens.sort_by_key(|(id, _)| **id);
                for (token, count) in tokens {
                    writeln!(w, "{}\t{}\t{}\t{}", k + 1, ctx_str, token, count)?;
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(crate::fsio::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a count dump back; the round trip is lossless.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let magic = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::format("model", "empty file"))?;
        let version: u32 = magic
            .strip_prefix(MODEL_MAGIC)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::format("model", format!("bad header {magic:?}")))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                format: "model",
                found: version,
                supported: MODEL_FORMAT_VERSION,
            });
        }

        let mut order: Option<usize> = None;
        let mut vocab_size: Option<usize> = None;
        let mut alpha: Option<f64> = None;
        let mut weights: Option<Vec<f64>> = None;
        for _ in 0..4 {
            let line = lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::format("model", "truncated header"))?;
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::format("model", format!("bad header line {line:?}")))?;
            let bad = |field: &str| Error::format("model", format!("bad {field}: {value:?}"));
            match key {
                "order" => order = Some(value.parse().map_err(|_| bad("order"))?),
                "vocab_size" => vocab_size = Some(value.parse().map_err(|_| bad("vocab_size"))?),
                "alpha" => alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
                "weights" => {
                    let parsed: std::result::Result<Vec<f64>, _> =
                        value.split(' ').map(str::parse).collect();
                    weights = Some(parsed.map_err(|_| bad("weights"))?);
                }
                _ => {
                    return Err(Error::format(
                        "model",
                        format!("unknown header key {key:?}"),
                    ))
                }
            }
        }
        let order = order.ok_or_else(|| Error::format("model", "missing order"))?;
        let vocab_size = vocab_size.ok_or_else(|| Error::format("model", "missing vocab_size"))?;
        let alpha = alpha.ok_or_else(|| Error::format("model", "missing alpha"))?;
        let weights = weights.ok_or_else(|| Error::format("model", "missing weights"))?;
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        let weights = validate_weights(&weights, order)?;

        let mut tables: Vec<HashMap<Box<[TokenId]>, ContextTable>> =
            (0..order).map(|_| HashMap::new()).collect();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::format(
                    "model",
                    format!("expected 4 tab-separated fields: {line:?}"),
                ));
            }
            let k: usize = fields[0]
                .parse()
                .map_err(|_| Error::format("model", format!("bad k: {:?}", fields[0])))?;
            if k < 1 || k > order {
                return Err(Error::format("model", format!("k = {k} out of range")));
            }
            let ctx: Vec<TokenId> = if fields[1].is_empty() {
                Vec::new()
            } else {
                fields[1]
                    .split(' ')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::format("model", format!("bad context: {:?}", fields[1])))?
            };
            if ctx.len() != k - 1 {
                return Err(Error::format(
                    "model",
                    format!("context length {} does not match k = {k}", ctx.len()),
                ));
            }
            let token: TokenId = fields[2]
                .parse()
                .map_err(|_| Error::format("model", format!("bad token: {:?}", fields[2])))?;
            if ctx
                .iter()
                .chain([&token])
                .any(|&id| id as usize >= vocab_size)
            {
                return Err(Error::format(
                    "model",
                    format!("token id out of range for vocab_size {vocab_size}: {line:?}"),
                ));
            }
            let count: u64 = fields[3]
                .parse()
                .map_err(|_| Error::format("model", format!("bad count: {:?}", fields[3])))?;
            let entry = match tables[k - 1].get_mut(ctx.as_slice()) {
                Some(entry) => entry,
                None => tables[k - 1].entry(ctx.into_boxed_slice()).or_default(),
            };
            if entry.counts.insert(token, count).is_some() {
                return Err(Error::format(
                    "model",
                    format!("duplicate entry for k = {k}, token {token}"),
                ));
            }
            entry.total += count;
        }
        Ok(NGramModel::assemble(
            order, vocab_size, alpha, weights, tables,
        ))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(crate::fsio::open(path)?))
    }
}

impl LanguageModel for NGramModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn cond_logprob(&self, context: &[TokenId], token: TokenId) -> f64 {
        assert!(
            (token as usize) < self.vocab_size,
            "token id {token} out of range for vocabulary of size {}",
            self.vocab_size
        );
        let mut terms = Vec::with_capacity(self.order);
        for k in 0..self.order {
            terms.push(self.log_weights[k] + self.component_logprob(k, context, token));
        }
        logsumexp(&terms)
    }

    fn cond_logprob_set(&self, context: &[TokenId], set: &TokenSet) -> f64 {
        if set.is_empty() {
            return f64::NEG_INFINITY;
        }
        let mut terms = Vec::with_capacity(self.order);
        for k in 0..self.order {
            terms.push(self.log_weights[k] + self.component_logprob_set(k, context, set));
        }
        logsumexp(&terms)
    }
}

/// A unigram model is the degenerate order-1 case: the context is ignored.
/// This is what "use the unigram model as the language model" means in the
/// metric checks, where PPLu must come out exactly 1.
impl LanguageModel for UnigramModel {
    fn vocab_size(&self) -> usize {
        UnigramSource::vocab_size(self)
    }

    fn cond_logprob(&self, _context: &[TokenId], token: TokenId) -> f64 {
        self.log_unigram(token)
    }

    fn cond_logprob_set(&self, _context: &[TokenId], set: &TokenSet) -> f64 {
        self.log_unigram_set(set)
    }
}
