//! Orchestration behind the `pplu` binary: file handling around the library
//! operations, one function per subcommand.
//!
//! Every structured output embeds the fully resolved [`RunConfig`] and a
//! format version, so files are self-describing and reproducible: the same
//! inputs, flags, and seed always produce identical bytes.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::{build_vocabulary, tokenize, TokenSet, TokenizedCorpus, Vocabulary};
use crate::gen::CorpusGenConfig;
use crate::metrics::{score_corpus, write_scores_jsonl, CorpusScore};
use crate::ngram::{train_ngram, NGramModel};
use crate::ranking::{divergence_report, rank_sentences, DivergenceReport};
use crate::split::{
    empirical_split_experiment, verify_invariance, SplitMode, SplitReport, SplitSpec,
};
use crate::sweep::{run_vocab_sweep, write_sweep_csv, SweepMode, SweepPoint};
use crate::unigram::{count_unigrams, UnigramModel};
use crate::{Error, Result};

/// Version of the embedded run-record layout.
pub const RUN_CONFIG_VERSION: u32 = 1;

/// The fully resolved configuration of one subcommand run. Serialized into
/// every structured output the run produces.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub config_version: u32,
    /// Base of the exponentials in all reported metrics.
    pub log_base: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vocab: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unigram: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uni_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sense_triggers: Option<Vec<String>>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            config_version: RUN_CONFIG_VERSION,
            log_base: "e",
            ..RunConfig::default()
        }
    }

    fn to_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

/// Reads a corpus text file into lines.
pub fn read_corpus_lines(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(crate::fsio::open(path)?);
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line?);
    }
    Ok(lines)
}

fn load_tokenized(corpus: &Path, vocab: &Vocabulary) -> Result<TokenizedCorpus> {
    Ok(tokenize(read_corpus_lines(corpus)?, vocab))
}

/// `gen-corpus`: write a synthetic corpus file.
pub fn cmd_gen_corpus(config: &CorpusGenConfig, out: &Path) -> Result<()> {
    crate::gen::write_corpus(config, out)
}

/// `build-vocab`: count, cut off, order, and write the vocabulary file.
pub fn cmd_build_vocab(
    corpus: &Path,
    min_count: usize,
    max_size: Option<usize>,
    out: &Path,
) -> Result<Vocabulary> {
    let lines = read_corpus_lines(corpus)?;
    let vocab = build_vocabulary(lines, min_count, max_size)?;
    vocab.save(out)?;
    Ok(vocab)
}

/// `train`: fit the n-gram model, write the model dump, and optionally the
/// unigram counts file.
#[allow(clippy::too_many_arguments)]
pub fn cmd_train(
    corpus: &Path,
    vocab_path: &Path,
    order: usize,
    alpha: f64,
    weights: Option<&[f64]>,
    model_out: &Path,
    unigram_out: Option<&Path>,
) -> Result<NGramModel> {
    let vocab = Vocabulary::load(vocab_path)?;
    let tokenized = load_tokenized(corpus, &vocab)?;
    let model = train_ngram(&tokenized, order, alpha, weights)?;
    model.save(model_out)?;
    if let Some(path) = unigram_out {
        // Counts are smoothing-free; alpha is chosen again at load time.
        let uni = count_unigrams(&tokenized, 0.0)?;
        uni.save_counts(&vocab, path)?;
    }
    Ok(model)
}

/// `score`: score a corpus under a trained model and unigram counts,
/// writing per-sentence JSONL (to `out`, or stdout when absent).
pub fn cmd_score(
    corpus: &Path,
    vocab_path: &Path,
    model_path: &Path,
    unigram_path: &Path,
    uni_alpha: f64,
    out: Option<&Path>,
) -> Result<CorpusScore> {
    let vocab = Vocabulary::load(vocab_path)?;
    let model = NGramModel::load(model_path)?;
    if model.vocab_size() != vocab.size() {
        return Err(Error::parameter(
            "model",
            format!(
                "model vocabulary size {} does not match vocabulary file size {}",
                model.vocab_size(),
                vocab.size()
            ),
        ));
    }
    let uni = UnigramModel::load_counts(unigram_path, &vocab, uni_alpha)?;
    let tokenized = load_tokenized(corpus, &vocab)?;
    let score = score_corpus(&model, &uni, &tokenized)?;

    let mut config = RunConfig::new("score");
    config.corpus = Some(corpus.to_path_buf());
    config.vocab = Some(vocab_path.to_path_buf());
    config.model = Some(model_path.to_path_buf());
    config.unigram = Some(unigram_path.to_path_buf());
    config.uni_alpha = Some(uni_alpha);
    config.out = out.map(Path::to_path_buf);
    let config = config.to_value()?;
    match out {
        Some(path) => {
            let mut w = BufWriter::new(crate::fsio::create(path)?);
            write_scores_jsonl(&mut w, &score, Some(config))?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            write_scores_jsonl(stdout.lock(), &score, Some(config))?;
        }
    }
    Ok(score)
}

/// Assignment flavor requested for `split-check`.
#[derive(Debug, Clone, Default)]
pub enum SplitCheckMode {
    /// Analytic views; the invariance theorem is asserted.
    #[default]
    Analytic,
    /// Retrain on a randomly split copy and compare.
    EmpiricalRandom,
    /// Retrain on a copy split by the previous-token predicate.
    EmpiricalSense(Vec<String>),
}

/// `split-check`: run a split experiment and write the report. The caller
/// decides the exit code from `report.passed`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_split_check(
    corpus: &Path,
    vocab_path: &Path,
    target: &str,
    beta: f64,
    seed: u64,
    order: usize,
    alpha: f64,
    mode: SplitCheckMode,
    out: Option<&Path>,
) -> Result<SplitReport> {
    let vocab = Vocabulary::load(vocab_path)?;
    let tokenized = load_tokenized(corpus, &vocab)?;
    let target_id = vocab
        .id(target)
        .ok_or_else(|| Error::TargetAbsent(target.to_string()))?;
    let spec = SplitSpec {
        target: target_id,
        beta,
        token_a: format!("{target}_a"),
        token_b: format!("{target}_b"),
        seed,
    };

    let mut config = RunConfig::new("split-check");
    config.corpus = Some(corpus.to_path_buf());
    config.vocab = Some(vocab_path.to_path_buf());
    config.target = Some(target.to_string());
    config.beta = Some(beta);
    config.seed = Some(seed);
    config.order = Some(order);
    config.alpha = Some(alpha);
    config.out = out.map(Path::to_path_buf);

    let mut report = match &mode {
        SplitCheckMode::Analytic => {
            config.mode = Some("analytic".to_string());
            let lm = train_ngram(&tokenized, order, alpha, None)?;
            let uni = count_unigrams(&tokenized, 1.0)?;
            verify_invariance(&lm, &uni, &tokenized, &vocab, &spec)?
        }
        SplitCheckMode::EmpiricalRandom => {
            config.mode = Some("empirical-random".to_string());
            empirical_split_experiment(&tokenized, &vocab, &spec, order, alpha, &SplitMode::Random)?
        }
        SplitCheckMode::EmpiricalSense(triggers) => {
            config.mode = Some("empirical-sense-conditioned".to_string());
            config.sense_triggers = Some(triggers.clone());
            let ids: Result<Vec<_>> = triggers
                .iter()
                .map(|t| {
                    vocab.id(t).ok_or_else(|| {
                        Error::parameter(
                            "sense_triggers",
                            format!("token {t:?} is not in the vocabulary"),
                        )
                    })
                })
                .collect();
            let set = TokenSet::from_ids(vocab.size(), ids?);
            empirical_split_experiment(
                &tokenized,
                &vocab,
                &spec,
                order,
                alpha,
                &SplitMode::PreviousTokenIn(set),
            )?
        }
    };
    report.config = Some(config.to_value()?);
    if let Some(path) = out {
        let mut w = BufWriter::new(crate::fsio::create(path)?);
        report.write_json(&mut w)?;
        w.flush()?;
    }
    Ok(report)
}

/// `sweep`: run the vocabulary sweep and write the CSV (to `out`, or stdout
/// when absent).
#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    train: &Path,
    test: &Path,
    vocab_path: &Path,
    keep_sizes: &[usize],
    order: usize,
    alpha: f64,
    mode: SweepMode,
    out: Option<&Path>,
) -> Result<Vec<SweepPoint>> {
    let vocab = Vocabulary::load(vocab_path)?;
    let train_c = load_tokenized(train, &vocab)?;
    let test_c = load_tokenized(test, &vocab)?;
    let points = run_vocab_sweep(&train_c, &test_c, &vocab, keep_sizes, order, alpha, mode)?;

    let mut config = RunConfig::new("sweep");
    config.train = Some(train.to_path_buf());
    config.test = Some(test.to_path_buf());
    config.vocab = Some(vocab_path.to_path_buf());
    config.keep_sizes = Some(keep_sizes.to_vec());
    config.order = Some(order);
    config.alpha = Some(alpha);
    config.mode = Some(format!("{mode:?}").to_lowercase());
    config.out = out.map(Path::to_path_buf);
    let config = config.to_value()?;
    match out {
        Some(path) => {
            let mut w = BufWriter::new(crate::fsio::create(path)?);
            write_sweep_csv(&mut w, &points, Some(&config))?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            write_sweep_csv(stdout.lock(), &points, Some(&config))?;
        }
    }
    Ok(points)
}

/// `rank`: read a scores JSONL file, rank sentences under both metrics, and
/// write the divergence report.
pub fn cmd_rank(scores_path: &Path, top_k: usize, out: Option<&Path>) -> Result<DivergenceReport> {
    let reader = BufReader::new(crate::fsio::open(scores_path)?);
    let (sentences, _summary) = crate::metrics::read_scores_jsonl(reader)?;
    let records = rank_sentences(&sentences);
    let mut report = divergence_report(&records, top_k)?;

    let mut config = RunConfig::new("rank");
    config.scores = Some(scores_path.to_path_buf());
    config.top_k = Some(top_k);
    config.out = out.map(Path::to_path_buf);
    report.config = Some(config.to_value()?);
    if let Some(path) = out {
        let mut w = BufWriter::new(crate::fsio::create(path)?);
        report.write_json(&mut w)?;
        w.flush()?;
    }
    Ok(report)
}
