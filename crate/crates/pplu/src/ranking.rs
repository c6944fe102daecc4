//! Sentence ranking under PPL vs PPLu.
//!
//! A model that hands out probability by word frequency alone can rank a
//! sentence of very common words highly under PPL while PPLu, which divides
//! that frequency advantage away, ranks it low. This module assigns both
//! ranks to every sentence and quantifies the disagreement, including its
//! correlation with how frequent the sentence's words are.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::math::pearson;
use crate::metrics::SentenceScore;
use crate::{Error, Result};

/// Version tag embedded in ranking report JSON.
pub const RANK_REPORT_FORMAT_VERSION: u32 = 1;
const RANK_REPORT_FORMAT_NAME: &str = "pplu-rank-report";

/// A sentence's position under both metrics (rank 1 = best = lowest value;
/// ties break by sentence id, so rankings are deterministic permutations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub sentence_id: usize,
    pub rank_ppl: usize,
    pub rank_pplu: usize,
    pub ppl: f64,
    pub pplu: f64,
    /// Per-token average `ln P_uni`; high values mean frequent words.
    pub mean_unigram_logprob: f64,
}

/// Assigns 1-based ranks under both metrics, ascending (lower metric =
/// better rank). Returns one record per input score, in input order.
pub fn rank_sentences(scores: &[SentenceScore]) -> Vec<RankRecord> {
    let rank_by = |key: fn(&SentenceScore) -> f64| -> Vec<usize> {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            key(&scores[a])
                .total_cmp(&key(&scores[b]))
                .then(scores[a].sentence_id.cmp(&scores[b].sentence_id))
        });
        let mut ranks = vec![0usize; scores.len()];
        for (rank, &idx) in order.iter().enumerate() {
            ranks[idx] = rank + 1;
        }
        ranks
    };
    let ppl_ranks = rank_by(|s| s.ppl);
    let pplu_ranks = rank_by(|s| s.pplu);
    scores
        .iter()
        .enumerate()
        .map(|(i, s)| RankRecord {
            sentence_id: s.sentence_id,
            rank_ppl: ppl_ranks[i],
            rank_pplu: pplu_ranks[i],
            ppl: s.ppl,
            pplu: s.pplu,
            mean_unigram_logprob: s.uni_logprob / s.length as f64,
        })
        .collect()
}

/// Where and how strongly the two rankings disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub format: String,
    pub version: u32,
    pub top_k: usize,
    pub sentence_count: usize,
    /// Best `top_k` sentences by PPL, with their rank under PPLu visible.
    pub top_by_ppl: Vec<RankRecord>,
    pub top_by_pplu: Vec<RankRecord>,
    /// Mean `|rank_ppl - rank_pplu|`.
    pub mean_abs_displacement: f64,
    /// Pearson correlation between the signed displacement
    /// `rank_pplu - rank_ppl` (positive = PPL flatters the sentence) and
    /// `mean_unigram_logprob`. Positive correlation says PPL favors
    /// frequent-word sentences.
    pub displacement_frequency_correlation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

/// Summarizes ranking divergence. `top_k` must not exceed the number of
/// records.
pub fn divergence_report(records: &[RankRecord], top_k: usize) -> Result<DivergenceReport> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if top_k > records.len() {
        return Err(Error::parameter(
            "top_k",
            format!("{top_k} exceeds the {} ranked sentences", records.len()),
        ));
    }
    let top = |key: fn(&RankRecord) -> usize| -> Vec<RankRecord> {
        let mut sorted: Vec<&RankRecord> = records.iter().collect();
        sorted.sort_by_key(|r| key(r));
        sorted.into_iter().take(top_k).cloned().collect()
    };
    let displacement: Vec<f64> = records
        .iter()
        .map(|r| r.rank_pplu as f64 - r.rank_ppl as f64)
        .collect();
    let freq: Vec<f64> = records.iter().map(|r| r.mean_unigram_logprob).collect();
    let mean_abs_displacement =
        displacement.iter().map(|d| d.abs()).sum::<f64>() / records.len() as f64;
    Ok(DivergenceReport {
        format: RANK_REPORT_FORMAT_NAME.to_string(),
        version: RANK_REPORT_FORMAT_VERSION,
        top_k,
        sentence_count: records.len(),
        top_by_ppl: top(|r| r.rank_ppl),
        top_by_pplu: top(|r| r.rank_pplu),
        mean_abs_displacement,
        displacement_frequency_correlation: pearson(&displacement, &freq),
        config: None,
    })
}

impl DivergenceReport {
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json<R: BufRead>(r: R) -> Result<Self> {
        let report: DivergenceReport = serde_json::from_reader(r)?;
        if report.format != RANK_REPORT_FORMAT_NAME {
            return Err(Error::format(
                "rank-report",
                format!("unexpected format tag {:?}", report.format),
            ));
        }
        if report.version != RANK_REPORT_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                format: "rank-report",
                found: report.version,
                supported: RANK_REPORT_FORMAT_VERSION,
            });
        }
        Ok(report)
    }

    /// Human-readable tables for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let header = format!(
            "{:<10} {:>10} {:>10} {:>12} {:>12} {:>14}\n",
            "sentence", "rank_ppl", "rank_pplu", "ppl", "pplu", "mean ln P_uni"
        );
        let row = |r: &RankRecord| {
            format!(
                "{:<10} {:>10} {:>10} {:>12.5} {:>12.5} {:>14.4}\n",
                r.sentence_id, r.rank_ppl, r.rank_pplu, r.ppl, r.pplu, r.mean_unigram_logprob
            )
        };
        out.push_str(&format!("top {} by PPL\n", self.top_k));
        out.push_str(&header);
        for r in &self.top_by_ppl {
            out.push_str(&row(r));
        }
        out.push_str(&format!("top {} by PPLu\n", self.top_k));
        out.push_str(&header);
        for r in &self.top_by_pplu {
            out.push_str(&row(r));
        }
        out.push_str(&format!(
            "sentences: {}   mean |rank_ppl - rank_pplu|: {:.3}   corr(displacement, frequency): {:.4}\n",
            self.sentence_count, self.mean_abs_displacement, self.displacement_frequency_correlation
        ));
        out
    }
}
