//! Vocabulary sweep: train once, evaluate under progressively smaller
//! vocabularies, and compare how far each metric drifts from its
//! full-vocabulary value.
//!
//! Reduction never renormalizes or drops tokens. Discarded types keep their
//! probability mass, aggregated onto the unknown token (the exact inverse
//! of the mass transform in [`crate::split`]), so the token count and the
//! probability space stay comparable across sweep points. Two evaluation
//! modes are supported:
//!
//! * [`SweepMode::Aggregated`]: the model trained on the full vocabulary is
//!   kept; positions whose token fell out of the vocabulary are scored with
//!   the summed conditional and unigram mass of the whole discarded group.
//! * [`SweepMode::Retrained`]: model and normalizer are retrained on the
//!   remapped training corpus for every kept size.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    reduce_vocabulary, TokenId, TokenSet, TokenizedCorpus, Vocabulary, RESERVED_TOKENS, UNK_ID,
};
use crate::math::Sum;
use crate::metrics::score_corpus;
use crate::metrics::{relative_difference, CorpusScore, SentenceScore};
use crate::ngram::{train_ngram, LanguageModel};
use crate::unigram::{count_unigrams, UnigramSource};
use crate::{Error, Result};

/// Version tag written as the first line of sweep CSV output.
pub const SWEEP_CSV_VERSION: u32 = 1;

/// Smoothing of the unigram normalizer used inside the sweep.
const UNIGRAM_ALPHA: f64 = 1.0;

/// How each reduced vocabulary is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Aggregated,
    Retrained,
}

impl std::str::FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aggregated" => Ok(SweepMode::Aggregated),
            "retrained" => Ok(SweepMode::Retrained),
            other => Err(Error::parameter(
                "mode",
                format!("expected 'aggregated' or 'retrained', got {other:?}"),
            )),
        }
    }
}

/// One evaluation point of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kept_vocab: usize,
    pub ppl: f64,
    pub pplu: f64,
    /// `|PPL(full) - PPL(kept)| / PPL(full) * 100`.
    pub rel_diff_ppl: f64,
    pub rel_diff_pplu: f64,
}

/// Scores a full-vocabulary corpus through a reduced-vocabulary lens: at
/// positions whose token the remap discards, the emitted event is "any
/// discarded token", scored with the group's total conditional and unigram
/// mass. Contexts stay in the model's own (full) vocabulary, exactly how
/// the split views map their contexts back, so merging variants that an
/// analytic split created recovers the base scores.
pub fn score_corpus_merged<L, U>(
    lm: &L,
    uni: &U,
    remap: &[TokenId],
    corpus: &TokenizedCorpus,
) -> Result<CorpusScore>
where
    L: LanguageModel + ?Sized,
    U: UnigramSource + ?Sized,
{
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if remap.len() != corpus.vocab_size() || remap.len() != lm.vocab_size() {
        return Err(Error::parameter(
            "remap",
            "remap table must cover the corpus and model vocabulary",
        ));
    }
    let unk_group = TokenSet::from_ids(
        remap.len(),
        (0..remap.len() as TokenId).filter(|&id| remap[id as usize] == UNK_ID),
    );
    let uni_unk_mass = uni.log_unigram_set(&unk_group);

    let mut sentences = Vec::with_capacity(corpus.sentences().len());
    for (id, sentence) in corpus.sentences().iter().enumerate() {
        let mut lm_sum = Sum::new();
        let mut uni_sum = Sum::new();
        for (t, &token) in sentence.iter().enumerate() {
            let (lm_term, uni_term) = if remap[token as usize] == UNK_ID {
                (
                    lm.cond_logprob_set(&sentence[..t], &unk_group),
                    uni_unk_mass,
                )
            } else {
                (
                    lm.cond_logprob(&sentence[..t], token),
                    uni.log_unigram(token),
                )
            };
            if !lm_term.is_finite() || !uni_term.is_finite() {
                return Err(Error::ZeroProbability { token, position: t });
            }
            lm_sum.add(lm_term);
            uni_sum.add(uni_term);
        }
        sentences.push(SentenceScore::from_logprobs(
            id,
            sentence.len(),
            lm_sum.value(),
            uni_sum.value(),
        ));
    }
    CorpusScore::from_sentences(sentences)
}

/// Trains once on the full-vocabulary training corpus, then evaluates the
/// test corpus at each kept size (strictly descending; typically starting at
/// the full size so the first point anchors the relative differences at
/// zero).
pub fn run_vocab_sweep(
    train: &TokenizedCorpus,
    test: &TokenizedCorpus,
    vocab: &Vocabulary,
    keep_sizes: &[usize],
    ngram_order: usize,
    alpha: f64,
    mode: SweepMode,
) -> Result<Vec<SweepPoint>> {
    if keep_sizes.is_empty() {
        return Err(Error::InvalidKeepSize("no keep sizes given".to_string()));
    }
    for pair in keep_sizes.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::InvalidKeepSize(format!(
                "keep sizes must be strictly descending, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    for &k in keep_sizes {
        if k > vocab.size() || k < RESERVED_TOKENS {
            return Err(Error::InvalidKeepSize(format!(
                "keep size {k} outside [{RESERVED_TOKENS}, {}]",
                vocab.size()
            )));
        }
    }
    if train.vocab_size() != vocab.size() || test.vocab_size() != vocab.size() {
        return Err(Error::parameter(
            "corpus",
            "train and test must be tokenized against the full vocabulary",
        ));
    }

    let lm = train_ngram(train, ngram_order, alpha, None)?;
    let uni = count_unigrams(train, UNIGRAM_ALPHA)?;
    let baseline = score_corpus(&lm, &uni, test)?;

    let mut points = Vec::with_capacity(keep_sizes.len());
    for &keep in keep_sizes {
        let (reduced_vocab, remap) = reduce_vocabulary(vocab, keep)?;
        let score = match mode {
            SweepMode::Aggregated => score_corpus_merged(&lm, &uni, &remap, test)?,
            SweepMode::Retrained => {
                let train_r = train.remap(&remap, reduced_vocab.size())?;
                let test_r = test.remap(&remap, reduced_vocab.size())?;
                let lm_r = train_ngram(&train_r, ngram_order, alpha, None)?;
                let uni_r = count_unigrams(&train_r, UNIGRAM_ALPHA)?;
                score_corpus(&lm_r, &uni_r, &test_r)?
            }
        };
        points.push(SweepPoint {
            kept_vocab: keep,
            ppl: score.ppl,
            pplu: score.pplu,
            rel_diff_ppl: relative_difference(baseline.ppl, score.ppl)?,
            rel_diff_pplu: relative_difference(baseline.pplu, score.pplu)?,
        });
    }
    Ok(points)
}

/// Writes the plot-ready CSV: a version comment, an optional config comment,
/// the header, then one row per point.
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    points: &[SweepPoint],
    config: Option<&serde_json::Value>,
) -> Result<()> {
    writeln!(w, "# pplu-sweep v{SWEEP_CSV_VERSION}")?;
    if let Some(config) = config {
        writeln!(w, "# config {config}")?;
    }
    writeln!(w, "kept_vocab,ppl,pplu,rel_diff_ppl,rel_diff_pplu")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.kept_vocab, p.ppl, p.pplu, p.rel_diff_ppl, p.rel_diff_pplu
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, tokenize};
    use crate::gen::{generate_corpus_lines, CorpusGenConfig};
    use crate::split::{analytic_split_views, split_corpus, SplitSpec};

    fn zipf_fixture(seed: u64, tokens: usize) -> (TokenizedCorpus, TokenizedCorpus, Vocabulary) {
        let config = CorpusGenConfig {
            vocab_size: 300,
            token_count: tokens,
            zipf_exponent: 1.0,
            bigram_coherence: 0.6,
            seed,
            min_sentence_len: 6,
            max_sentence_len: 18,
        };
        let train_lines = generate_corpus_lines(&config).unwrap();
        let test_lines = generate_corpus_lines(&CorpusGenConfig {
            seed: seed + 1000,
            ..config
        })
        .unwrap();
        let vocab = build_vocabulary(train_lines.iter(), 1, None).unwrap();
        let train = tokenize(train_lines.iter(), &vocab);
        let test = tokenize(test_lines.iter(), &vocab);
        (train, test, vocab)
    }

    #[test]
    fn full_size_point_has_zero_relative_differences() {
        let (train, test, vocab) = zipf_fixture(1, 8000);
        for mode in [SweepMode::Aggregated, SweepMode::Retrained] {
            let points =
                run_vocab_sweep(&train, &test, &vocab, &[vocab.size()], 2, 0.5, mode).unwrap();
            assert_eq!(points.len(), 1);
            assert_eq!(points[0].rel_diff_ppl, 0.0, "{mode:?}");
            assert_eq!(points[0].rel_diff_pplu, 0.0, "{mode:?}");
        }
    }

    #[test]
    fn keep_sizes_must_descend_and_fit() {
        let (train, test, vocab) = zipf_fixture(2, 3000);
        let full = vocab.size();
        for bad in [
            vec![],
            vec![full, full],
            vec![full / 2, full],
            vec![full + 1],
            vec![1],
        ] {
            assert!(
                run_vocab_sweep(&train, &test, &vocab, &bad, 2, 0.5, SweepMode::Aggregated)
                    .is_err(),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn merged_view_keeps_normalization() {
        let (train, test, vocab) = zipf_fixture(3, 6000);
        let lm = train_ngram(&train, 2, 0.5, None).unwrap();
        let uni = count_unigrams(&train, 1.0).unwrap();
        let keep = vocab.size() / 2;
        let (_, remap) = reduce_vocabulary(&vocab, keep).unwrap();
        let unk_group = TokenSet::from_ids(
            remap.len(),
            (0..remap.len() as TokenId).filter(|&id| remap[id as usize] == UNK_ID),
        );
        // For a handful of contexts: kept singletons plus the merged group
        // must partition the probability space.
        for ctx in [&test.sentences()[0][..2], &test.sentences()[1][..4]] {
            let mut sum = Sum::new();
            for id in 0..vocab.size() as TokenId {
                if remap[id as usize] != UNK_ID {
                    sum.add(lm.cond_logprob(ctx, id).exp());
                }
            }
            sum.add(lm.cond_logprob_set(ctx, &unk_group).exp());
            assert!((sum.value() - 1.0).abs() < 1e-9);
        }
        let mut sum = Sum::new();
        for id in 0..vocab.size() as TokenId {
            if remap[id as usize] != UNK_ID {
                sum.add(uni.log_unigram(id).exp());
            }
        }
        sum.add(uni.log_unigram_set(&unk_group).exp());
        assert!((sum.value() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn merging_an_analytic_split_recovers_the_base_scores() {
        // Split the least frequent token, evaluate the split corpus under
        // the analytic views ("full"), then reduce the enlarged vocabulary
        // back by one. Both variants fold into the unknown group; because
        // the unknown token itself carries zero mass in an unsmoothed model,
        // the merged scores equal the original ones and the PPLu relative
        // difference vanishes while the PPL difference stays visible.
        let lines = [
            "a b c d e",
            "b c e a d",
            "e d c b a",
            "c c d a b e",
            "a d e b c",
        ];
        let vocab = build_vocabulary(lines, 1, None).unwrap();
        let corpus = tokenize(lines, &vocab);
        let lm = train_ngram(&corpus, 2, 0.0, None).unwrap();
        let uni = count_unigrams(&corpus, 0.0).unwrap();
        let base = score_corpus(&lm, &uni, &corpus).unwrap();

        let target = (vocab.size() - 1) as TokenId; // least frequent entry
        let spec = SplitSpec {
            target,
            beta: 0.3,
            token_a: "va".into(),
            token_b: "vb".into(),
            seed: 9,
        };
        let (split_c, split_vocab) = split_corpus(&corpus, &vocab, &spec).unwrap();
        let (split_lm, split_uni) = analytic_split_views(&lm, &uni, &spec).unwrap();
        let full = score_corpus(&split_lm, &split_uni, &split_c).unwrap();

        let (_, remap) = reduce_vocabulary(&split_vocab, split_vocab.size() - 2).unwrap();
        let merged = score_corpus_merged(&split_lm, &split_uni, &remap, &split_c).unwrap();

        assert!((merged.ppl - base.ppl).abs() < 1e-9 * base.ppl);
        assert!((merged.pplu - base.pplu).abs() < 1e-9 * base.pplu);
        let rd_pplu = relative_difference(full.pplu, merged.pplu).unwrap();
        let rd_ppl = relative_difference(full.ppl, merged.ppl).unwrap();
        assert!(rd_pplu < 1e-7, "rel diff pplu = {rd_pplu}");
        assert!(rd_ppl > 0.1, "rel diff ppl = {rd_ppl}");
    }

    #[test]
    fn pplu_moves_less_than_ppl_on_zipf_corpora() {
        let (train, test, vocab) = zipf_fixture(4, 20_000);
        let full = vocab.size();
        let keeps = [full, full * 3 / 4, full / 2];
        for mode in [SweepMode::Aggregated, SweepMode::Retrained] {
            let points = run_vocab_sweep(&train, &test, &vocab, &keeps, 2, 0.5, mode).unwrap();
            for p in &points[1..] {
                assert!(
                    p.rel_diff_pplu <= p.rel_diff_ppl,
                    "{mode:?} keep={}: pplu diff {} > ppl diff {}",
                    p.kept_vocab,
                    p.rel_diff_pplu,
                    p.rel_diff_ppl
                );
                assert!(p.ppl.is_finite() && p.ppl > 0.0);
                assert!(p.pplu.is_finite() && p.pplu > 0.0);
            }
        }
    }

    #[test]
    fn csv_output_shape() {
        let points = vec![
            SweepPoint {
                kept_vocab: 10,
                ppl: 5.0,
                pplu: 1.5,
                rel_diff_ppl: 0.0,
                rel_diff_pplu: 0.0,
            },
            SweepPoint {
                kept_vocab: 5,
                ppl: 4.0,
                pplu: 1.45,
                rel_diff_ppl: 20.0,
                rel_diff_pplu: 3.3,
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &points, Some(&serde_json::json!({"order": 2}))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# pplu-sweep v1");
        assert!(lines[1].starts_with("# config"));
        assert_eq!(lines[2], "kept_vocab,ppl,pplu,rel_diff_ppl,rel_diff_pplu");
        assert_eq!(lines[3], "10,5,1.5,0,0");
        assert_eq!(lines.len(), 5);
    }
}
