//! Fine-grained evaluation subsets and subset profiling.
//!
//! Each setting ranks records by one per-record concentration and keeps the
//! top `ceil(N / 10)` by rank, so membership never depends on input order.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpe::Segmenter;
use crate::dataset::{DatasetRecord, DomainLexicon};
use crate::error::{Error, Result};
use crate::metrics::{novelty_fraction, oov_tally, usable_records};
use crate::rouge::rouge_l_f;
use crate::words::WordCounts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub id: String,
    pub difficult_sd: f64,
    pub difficult_rs: f64,
    pub all_sd: f64,
    pub all_rs: f64,
    pub novel_rs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "Difficult_SD")]
    DifficultSd,
    #[serde(rename = "Difficult_RS")]
    DifficultRs,
    #[serde(rename = "Novel_RS")]
    NovelRs,
    #[serde(rename = "All_SD")]
    AllSd,
    #[serde(rename = "All_RS")]
    AllRs,
    #[serde(rename = "Test_Full")]
    TestFull,
}

impl Setting {
    /// The five ranked settings, excluding the full test set.
    pub const RANKED: [Setting; 5] = [
        Setting::DifficultSd,
        Setting::DifficultRs,
        Setting::NovelRs,
        Setting::AllSd,
        Setting::AllRs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setting::DifficultSd => "Difficult_SD",
            Setting::DifficultRs => "Difficult_RS",
            Setting::NovelRs => "Novel_RS",
            Setting::AllSd => "All_SD",
            Setting::AllRs => "All_RS",
            Setting::TestFull => "Test_Full",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::RANKED
            .into_iter()
            .chain([Setting::TestFull])
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown setting {s:?}")))
    }
}

impl RecordScore {
    /// The score a setting ranks by; `None` for the full test set.
    pub fn score(&self, setting: Setting) -> Option<f64> {
        match setting {
            Setting::DifficultSd => Some(self.difficult_sd),
            Setting::DifficultRs => Some(self.difficult_rs),
            Setting::NovelRs => Some(self.novel_rs),
            Setting::AllSd => Some(self.all_sd),
            Setting::AllRs => Some(self.all_rs),
            Setting::TestFull => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSlice {
    pub setting: Setting,
    pub threshold: f64,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecords {
    pub scores: Vec<RecordScore>,
    /// Ids excluded because their summary is empty after normalization.
    pub skipped: Vec<String>,
}

/// Per-record occurrence-weighted OOV concentrations and summary novelty.
pub fn score_records<S: Segmenter + ?Sized>(
    seg: &S,
    records: &[DatasetRecord],
    lexicon: &DomainLexicon,
) -> Result<ScoredRecords> {
    if records.is_empty() {
        return Err(Error::EmptyInput("record list"));
    }
    let (kept, skipped) = usable_records(records);
    let scores = kept
        .par_iter()
        .map(|r| score_record(seg, r, lexicon))
        .collect::<Result<_>>()?;
    Ok(ScoredRecords { scores, skipped })
}

pub fn score_record<S: Segmenter + ?Sized>(
    seg: &S,
    record: &DatasetRecord,
    lexicon: &DomainLexicon,
) -> Result<RecordScore> {
    let sd = oov_tally(seg, &WordCounts::from_text(&record.source), lexicon);
    let rs = oov_tally(seg, &WordCounts::from_text(&record.summary), lexicon);
    Ok(RecordScore {
        id: record.id.clone(),
        difficult_sd: sd.difficult_concentration(),
        difficult_rs: rs.difficult_concentration(),
        all_sd: sd.all_concentration(),
        all_rs: rs.all_concentration(),
        novel_rs: novelty_fraction(record)?,
    })
}

/// Score descending, then id ascending.
fn ranked(scores: &[RecordScore], setting: Setting) -> Vec<(&str, f64)> {
    let mut v: Vec<(&str, f64)> = scores
        .iter()
        .map(|s| (s.id.as_str(), s.score(setting).unwrap_or(0.0)))
        .collect();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    v
}

/// `ceil(n / 10)`.
pub fn slice_size(n: usize) -> usize {
    n.div_ceil(10)
}

fn check_unique(scores: &[RecordScore]) -> Result<()> {
    let mut seen = HashSet::with_capacity(scores.len());
    for s in scores {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DuplicateRecord(s.id.clone()));
        }
    }
    Ok(())
}

/// Top `ceil(N / 10)` records for `setting`. The full test set keeps every
/// id in ascending order with threshold 0.
pub fn percentile_slice(scores: &[RecordScore], setting: Setting) -> Result<EvalSlice> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("score list"));
    }
    check_unique(scores)?;
    if setting == Setting::TestFull {
        let mut ids: Vec<String> = scores.iter().map(|s| s.id.clone()).collect();
        ids.sort();
        return Ok(EvalSlice {
            setting,
            threshold: 0.0,
            ids,
        });
    }
    if scores.len() < 10 {
        log::warn!("only {} scored records; slicing anyway", scores.len());
    }
    let order = ranked(scores, setting);
    let k = slice_size(order.len());
    Ok(EvalSlice {
        setting,
        threshold: order[k - 1].1,
        ids: order[..k].iter().map(|(id, _)| id.to_string()).collect(),
    })
}

/// Every record whose score reaches an absolute `threshold`, ranked as in
/// [`percentile_slice`]. Used when a fixed cut replaces the percentile.
pub fn threshold_slice(scores: &[RecordScore], setting: Setting, threshold: f64) -> Result<EvalSlice> {
    if setting == Setting::TestFull {
        return Err(Error::InvalidArgument(
            "the full test set has no score to threshold".into(),
        ));
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold {threshold} is not finite")));
    }
    check_unique(scores)?;
    let ids: Vec<String> = ranked(scores, setting)
        .into_iter()
        .take_while(|(_, s)| *s >= threshold)
        .map(|(id, _)| id.to_string())
        .collect();
    if ids.is_empty() {
        log::warn!("no record of {setting} reaches threshold {threshold}");
    }
    Ok(EvalSlice {
        setting,
        threshold,
        ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetProfile {
    #[serde(rename = "Difficult-RS Concentration")]
    pub difficult_rs: f64,
    #[serde(rename = "Novel-RS Concentration")]
    pub novel_rs: f64,
    #[serde(rename = "Rouge-LCS overlap between source and reference")]
    pub rouge_overlap: f64,
    #[serde(rename = "Size")]
    pub size: usize,
}

/// Means over a subset of the Difficult-RS concentration, the summary
/// novelty and the Rouge-L F1 of the source scored against the summary.
/// Values are fractions in [0, 1].
pub fn subset_profile<S: Segmenter + ?Sized, I: AsRef<str>>(
    records: &[DatasetRecord],
    subset_ids: &[I],
    seg: &S,
    lexicon: &DomainLexicon,
) -> Result<SubsetProfile> {
    if subset_ids.is_empty() {
        return Err(Error::EmptyInput("subset"));
    }
    let by_id: HashMap<&str, &DatasetRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut seen = HashSet::new();
    let mut members = Vec::with_capacity(subset_ids.len());
    for id in subset_ids {
        let id = id.as_ref();
        let r = by_id
            .get(id)
            .ok_or_else(|| Error::UnknownRecord(id.to_owned()))?;
        if !seen.insert(id) {
            return Err(Error::DuplicateRecord(id.to_owned()));
        }
        members.push(*r);
    }
    let rows: Vec<(f64, f64, f64)> = members
        .par_iter()
        .map(|r| {
            let s = score_record(seg, r, lexicon)?;
            let overlap = rouge_l_f(&r.summary, &r.source)?;
            Ok((s.difficult_rs, s.novel_rs, overlap.f1))
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let mean = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Ok(SubsetProfile {
        difficult_rs: mean(|r| r.0),
        novel_rs: mean(|r| r.1),
        rouge_overlap: mean(|r| r.2),
        size: rows.len(),
    })
}
