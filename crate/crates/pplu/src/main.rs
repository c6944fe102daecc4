use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use pplu::cli::{self, SplitCheckMode};
use pplu::gen::CorpusGenConfig;
use pplu::sweep::SweepMode;

/// Perplexity (PPL) and unigram-normalized perplexity (PPLu) toolkit.
#[derive(Parser)]
#[command(name = "pplu", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Zipf corpus with tunable bigram dependence.
    GenCorpus {
        /// Output corpus file (one sentence per line).
        #[arg(long)]
        out: PathBuf,
        /// Number of distinct token types.
        #[arg(long, default_value_t = 2000)]
        vocab_size: usize,
        /// Exact number of tokens to write.
        #[arg(long, default_value_t = 100_000)]
        tokens: usize,
        /// Zipf exponent (> 0).
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        /// Probability that a token repeats its predecessor, in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        coherence: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimum sentence length.
        #[arg(long, default_value_t = 8)]
        min_len: usize,
        /// Maximum sentence length.
        #[arg(long, default_value_t = 24)]
        max_len: usize,
    },
    /// Build a frequency-ordered vocabulary file from a corpus.
    BuildVocab {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep tokens occurring at least this often.
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        /// Cap on total vocabulary entries (reserved tokens included).
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Train an interpolated n-gram model; write the model dump.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Additive smoothing constant.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Interpolation weights, comma separated, one per order.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Also write the unigram counts TSV here.
        #[arg(long)]
        unigram_out: Option<PathBuf>,
    },
    /// Score a corpus: per-sentence JSONL plus corpus PPL/PPLu.
    Score {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Unigram counts TSV used as the PPLu normalizer.
        #[arg(long)]
        unigram: PathBuf,
        /// Smoothing for the unigram normalizer.
        #[arg(long, default_value_t = 1.0)]
        uni_alpha: f64,
        /// Scores JSONL path; omitted = JSONL to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check how splitting one vocabulary entry moves PPL but not PPLu.
    SplitCheck {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Token to split.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Retrain on the split corpus instead of using the exact views.
        #[arg(long)]
        empirical: bool,
        /// Comma-separated trigger tokens: occurrences after these become
        /// variant `a` (implies an empirical sense-conditioned split).
        #[arg(long, value_delimiter = ',')]
        sense_triggers: Option<Vec<String>>,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate under shrinking vocabularies; emit plot-ready CSV.
    Sweep {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Kept vocabulary sizes, comma separated, strictly descending.
        #[arg(long, value_delimiter = ',')]
        keep_sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// aggregated: score the full model through the reduced lens;
        /// retrained: refit per kept size.
        #[arg(long, default_value = "aggregated")]
        mode: SweepMode,
        /// CSV path; omitted = CSV to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank sentences by PPL and by PPLu from a scores JSONL file.
    Rank {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value_t = 3)]
        top_k: usize,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::GenCorpus {
            out,
            vocab_size,
            tokens,
            exponent,
            coherence,
            seed,
            min_len,
            max_len,
        } => {
            let config = CorpusGenConfig {
                vocab_size,
                token_count: tokens,
                zipf_exponent: exponent,
                bigram_coherence: coherence,
                seed,
                min_sentence_len: min_len,
                max_sentence_len: max_len,
            };
            cli::cmd_gen_corpus(&config, &out)?;
            eprintln!("wrote {} tokens to {}", tokens, out.display());
            Ok(0)
        }
        Command::BuildVocab {
            corpus,
            out,
            min_count,
            max_size,
        } => {
            let vocab = cli::cmd_build_vocab(&corpus, min_count, max_size, &out)?;
            eprintln!("wrote {} entries to {}", vocab.size(), out.display());
            Ok(0)
        }
        Command::Train {
            corpus,
            vocab,
            out,
            order,
            alpha,
            weights,
            unigram_out,
        } => {
            let model = cli::cmd_train(
                &corpus,
                &vocab,
                order,
                alpha,
                weights.as_deref(),
                &out,
                unigram_out.as_deref(),
            )?;
            eprintln!(
                "trained order-{} model over {} types; wrote {}",
                model.order(),
                model.vocab_size(),
                out.display()
            );
            Ok(0)
        }
        Command::Score {
            corpus,
            vocab,
            model,
            unigram,
            uni_alpha,
            out,
        } => {
            let score =
                cli::cmd_score(&corpus, &vocab, &model, &unigram, uni_alpha, out.as_deref())?;
            if out.is_some() {
                println!(
                    "sentences={} tokens={} ppl={:.6} pplu={:.6}",
                    score.sentences.len(),
                    score.token_count,
                    score.ppl,
                    score.pplu
                );
            }
            Ok(0)
        }
        Command::SplitCheck {
            corpus,
            vocab,
            target,
            beta,
            seed,
            order,
            alpha,
            empirical,
            sense_triggers,
            out,
        } => {
            let mode = match (sense_triggers, empirical) {
                (Some(triggers), _) => SplitCheckMode::EmpiricalSense(triggers),
                (None, true) => SplitCheckMode::EmpiricalRandom,
                (None, false) => SplitCheckMode::Analytic,
            };
            let report = cli::cmd_split_check(
                &corpus,
                &vocab,
                &target,
                beta,
                seed,
                order,
                alpha,
                mode,
                out.as_deref(),
            )?;
            print!("{}", report.render_table());
            if report.passed {
                Ok(0)
            } else {
                eprintln!("split-check: invariance violated");
                Ok(2)
            }
        }
        Command::Sweep {
            train,
            test,
            vocab,
            keep_sizes,
            order,
            alpha,
            mode,
            out,
        } => {
            cli::cmd_sweep(
                &train,
                &test,
                &vocab,
                &keep_sizes,
                order,
                alpha,
                mode,
                out.as_deref(),
            )?;
            Ok(0)
        }
        Command::Rank { scores, top_k, out } => {
            let report = cli::cmd_rank(&scores, top_k, out.as_deref())?;
            print!("{}", report.render_table());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("pplu: {err}");
            ExitCode::from(1)
        }
    }
}
