//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracle functions re-derive every probability from scratch with naive
//! linear-space arithmetic and their own counting loops; they share no code
//! with the library's log-space implementation, so agreement is evidence,
//! not tautology.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

pub mod oracle {
    use super::*;

    const EOS: u32 = 1;

    /// Naive k-gram recount: for every sentence and position, walk every
    /// order explicitly and collect (context, token) pairs.
    pub struct GramCounts {
        pub pair_counts: HashMap<(Vec<u32>, u32), u64>,
        pub context_totals: HashMap<Vec<u32>, u64>,
        pub order: usize,
    }

    pub fn count_grams(sentences: &[Vec<u32>], order: usize) -> GramCounts {
        let mut pair_counts = HashMap::new();
        let mut context_totals = HashMap::new();
        for sentence in sentences {
            for (pos, &token) in sentence.iter().enumerate() {
                for k in 1..=order {
                    let want = k - 1;
                    let mut context = Vec::with_capacity(want);
                    for back in (1..=want).rev() {
                        if pos >= back {
                            context.push(sentence[pos - back]);
                        } else {
                            context.push(EOS);
                        }
                    }
                    *context_totals.entry(context.clone()).or_insert(0u64) += 1;
                    *pair_counts.entry((context, token)).or_insert(0u64) += 1;
                }
            }
        }
        GramCounts {
            pair_counts,
            context_totals,
            order,
        }
    }

    /// Interpolated add-alpha conditional probability, linear space.
    pub fn cond_prob(
        counts: &GramCounts,
        alpha: f64,
        weights: &[f64],
        vocab_size: usize,
        context: &[u32],
        token: u32,
    ) -> f64 {
        let mut p = 0.0;
        for k in 1..=counts.order {
            let want = k - 1;
            let mut ctx = Vec::with_capacity(want);
            for back in (1..=want).rev() {
                if context.len() >= back {
                    ctx.push(context[context.len() - back]);
                } else {
                    ctx.push(EOS);
                }
            }
            let pair = counts
                .pair_counts
                .get(&(ctx.clone(), token))
                .copied()
                .unwrap_or(0) as f64;
            let total = counts.context_totals.get(&ctx).copied().unwrap_or(0) as f64;
            let denom = total + alpha * vocab_size as f64;
            let component = if denom == 0.0 {
                0.0
            } else {
                (pair + alpha) / denom
            };
            p += weights[k - 1] * component;
        }
        p
    }

    /// Hash-map unigram recount, linear space.
    pub fn unigram_prob(sentences: &[Vec<u32>], alpha: f64, vocab_size: usize, token: u32) -> f64 {
        let mut counts: HashMap<u32, u64> = HashMap::new();
        let mut total = 0u64;
        for sentence in sentences {
            for &t in sentence {
                *counts.entry(t).or_insert(0) += 1;
                total += 1;
            }
        }
        let c = counts.get(&token).copied().unwrap_or(0) as f64;
        (c + alpha) / (total as f64 + alpha * vocab_size as f64)
    }

    /// Whole-sentence probability as a plain linear-space product of the
    /// oracle conditionals (fine at desk-scale sentence lengths).
    pub fn sentence_prob(
        counts: &GramCounts,
        alpha: f64,
        weights: &[f64],
        vocab_size: usize,
        sentence: &[u32],
    ) -> f64 {
        let mut p = 1.0;
        for (t, &token) in sentence.iter().enumerate() {
            p *= cond_prob(counts, alpha, weights, vocab_size, &sentence[..t], token);
        }
        p
    }

    /// Independent frequency ranking of whitespace tokens: descending count,
    /// ties by first appearance. Reserved names are skipped like the
    /// vocabulary builder documents.
    pub fn frequency_rank(lines: &[String]) -> Vec<(String, usize)> {
        let mut counts: Vec<(String, usize, usize)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for line in lines {
            for token in line.split_whitespace() {
                if token == "<unk>" || token == "</s>" {
                    continue;
                }
                match index.get(token) {
                    Some(&i) => counts[i].1 += 1,
                    None => {
                        index.insert(token.to_string(), counts.len());
                        counts.push((token.to_string(), 1, counts.len()));
                    }
                }
            }
        }
        counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        counts.into_iter().map(|(t, c, _)| (t, c)).collect()
    }
}

/// Sentences over a Zipf-distributed synthetic alphabet, with a designated
/// target token inserted exactly once into the first `with_target` sentences.
pub fn corpus_with_single_target(
    seed: u64,
    sentence_count: usize,
    with_target: usize,
    alphabet: usize,
    target: &str,
) -> Vec<String> {
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let probs = pplu::gen::zipf_probabilities(alphabet, 1.0);
    let mut cumulative = Vec::with_capacity(alphabet);
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut lines = Vec::with_capacity(sentence_count);
    for i in 0..sentence_count {
        let len = rng.random_range(6..=28usize);
        let mut words: Vec<String> = (0..len)
            .map(|_| {
                let u: f64 = rng.random();
                let rank = cumulative.partition_point(|&c| c <= u).min(alphabet - 1);
                format!("b{}", rank + 1)
            })
            .collect();
        if i < with_target {
            let pos = rng.random_range(0..=words.len());
            words.insert(pos, target.to_string());
        }
        lines.push(words.join(" "));
    }
    lines
}
