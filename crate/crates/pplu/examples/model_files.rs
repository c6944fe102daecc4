//! The on-disk formats: vocabulary file, unigram counts TSV, and the
//! versioned n-gram model dump, all of which round-trip losslessly.
//!
//! Run with: cargo run --example model_files

use pplu::corpus::{build_vocabulary, tokenize, Vocabulary};
use pplu::gen::{generate_corpus_lines, CorpusGenConfig};
use pplu::metrics::score_corpus;
use pplu::ngram::{train_ngram, NGramModel};
use pplu::unigram::{count_unigrams, UnigramModel};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("pplu-model-files-example");
    std::fs::create_dir_all(&dir)?;

    let lines = generate_corpus_lines(&CorpusGenConfig {
        vocab_size: 50,
        token_count: 2_000,
        seed: 8,
        ..CorpusGenConfig::default()
    })?;
    let vocab = build_vocabulary(lines.iter(), 2, None)?;
    let corpus = tokenize(lines.iter(), &vocab);
    let model = train_ngram(&corpus, 2, 0.5, None)?;
    let uni = count_unigrams(&corpus, 1.0)?;

    let vocab_path = dir.join("vocab.txt");
    let counts_path = dir.join("counts.tsv");
    let model_path = dir.join("model.txt");
    vocab.save(&vocab_path)?;
    uni.save_counts(&vocab, &counts_path)?;
    model.save(&model_path)?;

    println!("vocabulary file ({}):", vocab_path.display());
    let text = std::fs::read_to_string(&vocab_path)?;
    for line in text.lines().take(5) {
        println!("  {line}");
    }
    println!("\nunigram counts ({}):", counts_path.display());
    let text = std::fs::read_to_string(&counts_path)?;
    for line in text.lines().take(5) {
        println!("  {line}");
    }
    println!("\nmodel dump ({}):", model_path.display());
    let text = std::fs::read_to_string(&model_path)?;
    for line in text.lines().take(8) {
        println!("  {line}");
    }

    // Round trip and prove the reloaded artifacts score identically.
    let vocab2 = Vocabulary::load(&vocab_path)?;
    let uni2 = UnigramModel::load_counts(&counts_path, &vocab2, 1.0)?;
    let model2 = NGramModel::load(&model_path)?;
    let original = score_corpus(&model, &uni, &corpus)?;
    let reloaded = score_corpus(&model2, &uni2, &corpus)?;
    assert_eq!(original.ppl, reloaded.ppl);
    assert_eq!(original.pplu, reloaded.pplu);
    println!(
        "\nreloaded model reproduces the scores exactly: ppl = {:.5}, pplu = {:.5}",
        reloaded.ppl, reloaded.pplu
    );
    Ok(())
}
