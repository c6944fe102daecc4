//! Ranking divergence: sentences made of very frequent words rank well
//! under PPL purely because their words are common; PPLu strips that
//! advantage and demotes them.
//!
//! Run with: cargo run --example rank_sentences

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

use pplu::corpus::{build_vocabulary, tokenize};
use pplu::metrics::score_corpus;
use pplu::ngram::train_ngram;
use pplu::ranking::{divergence_report, rank_sentences};
use pplu::unigram::count_unigrams;

fn main() -> anyhow::Result<()> {
    let mut rng = Pcg64Mcg::seed_from_u64(7);
    let fillers = ["the", "of", "and", "to", "a"];
    let pairs: Vec<(String, String)> = (1..=30)
        .map(|i| (format!("noun{i}"), format!("verb{i}")))
        .collect();

    // Training text: fillers everywhere in no particular order, plus pairs
    // where the second word reliably follows the first.
    let mut train = Vec::new();
    for _ in 0..600 {
        let mut words: Vec<String> = Vec::new();
        for _ in 0..5 {
            if rng.random::<f64>() < 0.5 {
                words.push(fillers[rng.random_range(0..fillers.len())].to_string());
            } else {
                let (x, y) = &pairs[rng.random_range(0..pairs.len())];
                words.push(x.clone());
                words.push(y.clone());
            }
        }
        train.push(words.join(" "));
    }
    // Test text: 5 all-filler sentences, then 20 patterned ones.
    let mut test = Vec::new();
    for _ in 0..5 {
        let words: Vec<String> = (0..8)
            .map(|_| fillers[rng.random_range(0..fillers.len())].to_string())
            .collect();
        test.push(words.join(" "));
    }
    for _ in 0..20 {
        let mut words = Vec::new();
        for _ in 0..4 {
            let (x, y) = &pairs[rng.random_range(0..pairs.len())];
            words.push(x.clone());
            words.push(y.clone());
        }
        test.push(words.join(" "));
    }

    let vocab = build_vocabulary(train.iter(), 1, None)?;
    let train_c = tokenize(train.iter(), &vocab);
    let test_c = tokenize(test.iter(), &vocab);
    let lm = train_ngram(&train_c, 2, 0.1, None)?;
    let uni = count_unigrams(&train_c, 1.0)?;
    let score = score_corpus(&lm, &uni, &test_c)?;

    let records = rank_sentences(&score.sentences);
    println!("all-frequent-word sentences (ids 0..5):");
    for r in records.iter().take(5) {
        println!(
            "  sentence {}: \"{}\"  rank by PPL = {}, rank by PPLu = {}",
            r.sentence_id, test[r.sentence_id], r.rank_ppl, r.rank_pplu
        );
    }
    let report = divergence_report(&records, 3)?;
    println!();
    print!("{}", report.render_table());
    Ok(())
}
