//! End-to-end scoring: generate a corpus, build a vocabulary, train an
//! n-gram model, and report PPL and PPLu side by side.
//!
//! Run with: cargo run --example score_corpus

use pplu::corpus::{build_vocabulary, tokenize};
use pplu::gen::{generate_corpus_lines, CorpusGenConfig};
use pplu::metrics::score_corpus;
use pplu::ngram::train_ngram;
use pplu::unigram::count_unigrams;

fn main() -> anyhow::Result<()> {
    // A 50k-token corpus with moderate context dependence.
    let config = CorpusGenConfig {
        vocab_size: 1000,
        token_count: 50_000,
        bigram_coherence: 0.6,
        seed: 1,
        ..CorpusGenConfig::default()
    };
    let train_lines = generate_corpus_lines(&config)?;
    let test_lines = generate_corpus_lines(&CorpusGenConfig {
        seed: 2,
        token_count: 10_000,
        ..config
    })?;

    let vocab = build_vocabulary(train_lines.iter(), 1, None)?;
    let train = tokenize(train_lines.iter(), &vocab);
    let test = tokenize(test_lines.iter(), &vocab);
    println!(
        "vocabulary: {} types; train: {} tokens; test: {} tokens",
        vocab.size(),
        train.token_count(),
        test.token_count()
    );

    let lm = train_ngram(&train, 3, 0.5, None)?;
    let uni = count_unigrams(&train, 1.0)?;
    let score = score_corpus(&lm, &uni, &test)?;

    println!("\nfirst sentences:");
    println!(
        "{:<4} {:>3} {:>12} {:>12} {:>12}",
        "id", "T", "ppl", "pplu", "unigram ppl"
    );
    for s in score.sentences.iter().take(8) {
        let uni_ppl = (-s.uni_logprob / s.length as f64).exp();
        println!(
            "{:<4} {:>3} {:>12.4} {:>12.4} {:>12.4}",
            s.sentence_id, s.length, s.ppl, s.pplu, uni_ppl
        );
    }
    println!(
        "\ncorpus: ppl = {:.4}, pplu = {:.4} over {} tokens",
        score.ppl, score.pplu, score.token_count
    );
    println!("(pplu < 1 means the model beats the unigram baseline through context)");
    Ok(())
}
