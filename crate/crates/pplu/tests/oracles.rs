//! Cross-checks of the library's counting and probability paths against the
//! independent brute-force oracles in `common`.

mod common;

use common::oracle;
use pplu::corpus::{build_vocabulary, reduce_vocabulary, tokenize, TokenId};
use pplu::gen::{generate_corpus_lines, CorpusGenConfig};
use pplu::ngram::{train_ngram, LanguageModel};
use pplu::unigram::{count_unigrams, UnigramSource};

fn zipf_lines(seed: u64, vocab: usize, tokens: usize) -> Vec<String> {
    generate_corpus_lines(&CorpusGenConfig {
        vocab_size: vocab,
        token_count: tokens,
        zipf_exponent: 1.0,
        bigram_coherence: 0.4,
        seed,
        min_sentence_len: 5,
        max_sentence_len: 15,
    })
    .unwrap()
}

#[test]
fn vocabulary_build_matches_frequency_sort_oracle() {
    // 1000 Zipf-sampled sentences, truncated to 100 entries: the retained
    // tokens and their order must match an independent count-and-sort.
    let lines = zipf_lines(3, 400, 10_000);
    assert!(lines.len() >= 500);
    let vocab = build_vocabulary(lines.iter(), 1, Some(100)).unwrap();
    assert_eq!(vocab.size(), 100);
    let ranked = oracle::frequency_rank(&lines);
    for (i, (token, _)) in ranked.iter().take(98).enumerate() {
        assert_eq!(
            vocab.token((i + 2) as TokenId),
            token,
            "rank {i} disagrees with the oracle"
        );
    }
}

#[test]
fn vocabulary_reduction_keeps_the_top_half_by_oracle_count() {
    let lines = zipf_lines(4, 200, 8_000);
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let keep = vocab.size() / 2;
    let (reduced, remap) = reduce_vocabulary(&vocab, keep).unwrap();
    let ranked = oracle::frequency_rank(&lines);
    // Exactly the oracle's top (keep - 2) tokens survive.
    let expected: Vec<&str> = ranked
        .iter()
        .take(keep - 2)
        .map(|(t, _)| t.as_str())
        .collect();
    let kept: Vec<&str> = (2..keep).map(|id| reduced.token(id as TokenId)).collect();
    assert_eq!(kept, expected);
    for (id, &new) in remap.iter().enumerate() {
        assert!((new as usize) < keep, "remap must stay in range");
        if id >= keep {
            assert_eq!(new, 0, "discarded ids must map to the unknown id");
        }
    }
}

#[test]
fn unigram_counts_match_hash_map_recount() {
    let lines = zipf_lines(5, 300, 20_000);
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let corpus = tokenize(lines.iter(), &vocab);
    let model = count_unigrams(&corpus, 0.0).unwrap();
    for id in 0..corpus.vocab_size() as TokenId {
        let expected = oracle::unigram_prob(corpus.sentences(), 0.0, corpus.vocab_size(), id);
        let got = model.log_unigram(id).exp();
        assert!(
            (got - expected).abs() <= 1e-12,
            "id {id}: {got} vs oracle {expected}"
        );
    }
}

#[test]
fn order_three_conditionals_match_nested_loop_oracle() {
    // 50-sentence corpus, every probability re-derived by the naive oracle.
    let lines: Vec<String> = zipf_lines(6, 40, 500).into_iter().take(50).collect();
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let corpus = tokenize(lines.iter(), &vocab);
    let weights = [0.5, 0.3, 0.2];
    let alpha = 0.3;
    let model = train_ngram(&corpus, 3, alpha, Some(&weights)).unwrap();
    let counts = oracle::count_grams(corpus.sentences(), 3);

    // Contexts of every length, seen and unseen.
    let v = corpus.vocab_size();
    let mut checked = 0;
    for sentence in corpus.sentences().iter().take(10) {
        for t in 0..sentence.len() {
            for token in [sentence[t], 0, (v - 1) as TokenId] {
                let got = model.cond_logprob(&sentence[..t], token).exp();
                let expected =
                    oracle::cond_prob(&counts, alpha, &weights, v, &sentence[..t], token);
                assert!(
                    (got - expected).abs() <= 1e-12,
                    "ctx {:?} token {token}: {got} vs {expected}",
                    &sentence[..t]
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn pmi_summary_matches_direct_per_token_accumulation() {
    // The pooled PMI estimate equals a flat average of per-token log
    // ratios, and is positive when the generator makes context informative.
    let lines = zipf_lines(9, 300, 20_000);
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let corpus = tokenize(lines.iter(), &vocab);
    let model = train_ngram(&corpus, 3, 0.5, None).unwrap();
    let uni = count_unigrams(&corpus, 1.0).unwrap();
    let score = pplu::metrics::score_corpus(&model, &uni, &corpus).unwrap();
    let pmi = pplu::metrics::pmi_summary(&score.sentences).unwrap();

    let mut acc = 0.0f64;
    let mut tokens = 0usize;
    for sentence in corpus.sentences() {
        for (t, &w) in sentence.iter().enumerate() {
            acc += model.cond_logprob(&sentence[..t], w) - uni.log_unigram(w);
            tokens += 1;
        }
    }
    let direct = acc / tokens as f64;
    assert!(pmi.mean_pmi > 0.0);
    assert_eq!(pmi.token_count, tokens);
    assert!(
        (pmi.mean_pmi - direct).abs() <= 1e-12,
        "{} vs {direct}",
        pmi.mean_pmi
    );
}

#[test]
fn sentence_metrics_match_linear_space_oracle() {
    // ppl and pplu reconstructed from raw linear-space products.
    let lines: Vec<String> = zipf_lines(8, 30, 300).into_iter().take(30).collect();
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let corpus = tokenize(lines.iter(), &vocab);
    let weights = [0.4, 0.3, 0.3];
    let alpha = 0.4;
    let model = train_ngram(&corpus, 3, alpha, Some(&weights)).unwrap();
    let uni = count_unigrams(&corpus, 1.0).unwrap();
    let counts = oracle::count_grams(corpus.sentences(), 3);
    let v = corpus.vocab_size();
    for (id, sentence) in corpus.sentences().iter().enumerate() {
        let score = pplu::metrics::score_sentence(&model, &uni, sentence, id).unwrap();
        let t = sentence.len() as f64;
        let p = oracle::sentence_prob(&counts, alpha, &weights, v, sentence);
        let p_uni: f64 = sentence
            .iter()
            .map(|&w| oracle::unigram_prob(corpus.sentences(), 1.0, v, w))
            .product();
        let ppl_oracle = p.powf(-1.0 / t);
        let pplu_oracle = (p / p_uni).powf(-1.0 / t);
        assert!(
            (score.ppl - ppl_oracle).abs() <= 1e-12 * ppl_oracle,
            "sentence {id}: ppl {} vs oracle {ppl_oracle}",
            score.ppl
        );
        assert!(
            (score.pplu - pplu_oracle).abs() <= 1e-12 * pplu_oracle,
            "sentence {id}: pplu {} vs oracle {pplu_oracle}",
            score.pplu
        );
    }
}

#[test]
fn sentence_logprobs_match_linear_space_products() {
    let lines: Vec<String> = zipf_lines(7, 30, 400).into_iter().take(40).collect();
    let vocab = build_vocabulary(lines.iter(), 1, None).unwrap();
    let corpus = tokenize(lines.iter(), &vocab);
    let weights = [0.6, 0.4];
    let alpha = 0.5;
    let model = train_ngram(&corpus, 2, alpha, Some(&weights)).unwrap();
    let counts = oracle::count_grams(corpus.sentences(), 2);
    for sentence in corpus.sentences() {
        let got = model.sentence_logprob(sentence).unwrap();
        let product =
            oracle::sentence_prob(&counts, alpha, &weights, corpus.vocab_size(), sentence);
        assert!((got - product.ln()).abs() <= 1e-12, "{got} vs ln {product}");
    }
}
