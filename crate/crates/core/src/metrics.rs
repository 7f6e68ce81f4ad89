//! Fragmentation and novelty statistics.
//!
//! All concentrations are occurrence-weighted unless a [`Weighting::Unique`]
//! report is requested. Lexicon lookups and novelty sets are case-folded;
//! tokenization sees the surface form.

use std::collections::HashSet;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpe::Segmenter;
use crate::dataset::{DatasetRecord, DomainLexicon, Field};
use crate::error::{Error, Result};
use crate::text::{is_punctuation, normalize_words, pretokenize};
use crate::words::WordCounts;

/// Integer tallies behind every fragmentation statistic. Tallies merge by
/// addition, so per-record results combine exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTally {
    pub occurrences: u64,
    pub subwords: u64,
    pub split_gt1: u64,
    pub split_gt3: u64,
}

impl SplitTally {
    pub fn record(&mut self, subword_count: usize, occurrences: u64) {
        self.occurrences += occurrences;
        self.subwords += subword_count as u64 * occurrences;
        if subword_count > 1 {
            self.split_gt1 += occurrences;
        }
        if subword_count > 3 {
            self.split_gt3 += occurrences;
        }
    }

    pub fn merge(&mut self, other: &SplitTally) {
        self.occurrences += other.occurrences;
        self.subwords += other.subwords;
        self.split_gt1 += other.split_gt1;
        self.split_gt3 += other.split_gt3;
    }

    pub fn fragment_score(&self) -> Option<f64> {
        (self.occurrences > 0).then(|| self.subwords as f64 / self.occurrences as f64)
    }

    pub fn split_gt1_fraction(&self) -> Option<f64> {
        (self.occurrences > 0).then(|| self.split_gt1 as f64 / self.occurrences as f64)
    }

    pub fn split_gt3_fraction(&self) -> Option<f64> {
        (self.occurrences > 0).then(|| self.split_gt3 as f64 / self.occurrences as f64)
    }
}

/// Subword count for each distinct word, in the multiset's order.
pub fn subword_counts<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts) -> Vec<(String, usize, u64)> {
    let entries: Vec<(&str, u64)> = words.iter().collect();
    entries
        .par_iter()
        .map(|(w, c)| (w.to_string(), seg.segment(w).subword_count, *c))
        .collect()
}

pub fn tally<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts) -> SplitTally {
    let mut t = SplitTally::default();
    for (_, n, c) in subword_counts(seg, words) {
        t.record(n, c);
    }
    t
}

/// Count-weighted mean number of subwords per word occurrence.
pub fn fragment_score<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts) -> Result<f64> {
    tally(seg, words).fragment_score().ok_or(Error::EmptyCorpus)
}

/// Count-weighted fraction of occurrences split into more than `k` subwords.
pub fn split_gt_fraction<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts, k: usize) -> Result<f64> {
    let mut total = 0u64;
    let mut over = 0u64;
    for (_, n, c) in subword_counts(seg, words) {
        total += c;
        if n > k {
            over += c;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(over as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub word_count: u64,
    pub fragment_score: f64,
    pub split_gt1_fraction: f64,
    pub split_gt3_fraction: f64,
    /// Words split into more than one subword, with their subword count.
    pub oov_words: Vec<(String, usize)>,
}

pub fn corpus_stats<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts) -> Result<CorpusStats> {
    let counts = subword_counts(seg, words);
    let mut t = SplitTally::default();
    let mut oov_words = Vec::new();
    for (w, n, c) in counts {
        t.record(n, c);
        if n > 1 {
            oov_words.push((w, n));
        }
    }
    Ok(CorpusStats {
        word_count: t.occurrences,
        fragment_score: t.fragment_score().ok_or(Error::EmptyCorpus)?,
        split_gt1_fraction: t.split_gt1_fraction().unwrap_or(0.0),
        split_gt3_fraction: t.split_gt3_fraction().unwrap_or(0.0),
        oov_words,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OovWord {
    /// Lowercased word.
    pub word: String,
    pub subword_count: usize,
    pub occurrences: u64,
}

/// Lexicon words in `text` split more than once (or more than thrice when
/// `difficult`), collapsed case-insensitively in order of first appearance.
pub fn oov_words<S: Segmenter + ?Sized>(
    seg: &S,
    text: &str,
    lexicon: &DomainLexicon,
    difficult: bool,
) -> Vec<OovWord> {
    let threshold = if difficult { 3 } else { 1 };
    let mut seen: IndexMap<String, (usize, u64)> = IndexMap::new();
    for piece in pretokenize(text) {
        if piece.chars().all(is_punctuation) {
            continue;
        }
        let lower = piece.to_lowercase();
        if !lexicon.contains(&lower) {
            continue;
        }
        match seen.get_mut(&lower) {
            Some(entry) => entry.1 += 1,
            None => {
                let n = seg.segment(piece).subword_count;
                seen.insert(lower, (n, 1));
            }
        }
    }
    seen.into_iter()
        .filter(|(_, (n, _))| *n > threshold)
        .map(|(word, (subword_count, occurrences))| OovWord {
            word,
            subword_count,
            occurrences,
        })
        .collect()
}

/// Lexicon-restricted OOV tallies over a text: numerator counts lexicon word
/// occurrences split more than once / thrice, denominator counts every word.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OovTally {
    pub words: u64,
    pub all_oov: u64,
    pub difficult_oov: u64,
}

impl OovTally {
    pub fn merge(&mut self, other: &OovTally) {
        self.words += other.words;
        self.all_oov += other.all_oov;
        self.difficult_oov += other.difficult_oov;
    }

    pub fn all_concentration(&self) -> f64 {
        ratio(self.all_oov, self.words)
    }

    pub fn difficult_concentration(&self) -> f64 {
        ratio(self.difficult_oov, self.words)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn oov_tally<S: Segmenter + ?Sized>(seg: &S, words: &WordCounts, lexicon: &DomainLexicon) -> OovTally {
    let mut t = OovTally::default();
    for (w, c) in words.iter() {
        t.words += c;
        if lexicon.contains(w) {
            let n = seg.segment(w).subword_count;
            if n > 1 {
                t.all_oov += c;
            }
            if n > 3 {
                t.difficult_oov += c;
            }
        }
    }
    t
}

/// Unique summary unigrams absent from the source, over unique summary
/// unigrams.
pub fn novelty_fraction(record: &DatasetRecord) -> Result<f64> {
    let summary: HashSet<String> = normalize_words(&record.summary).into_iter().collect();
    if summary.is_empty() {
        return Err(Error::EmptySummary(record.id.clone()));
    }
    let source: HashSet<String> = normalize_words(&record.source).into_iter().collect();
    let novel = summary.iter().filter(|w| !source.contains(*w)).count();
    Ok(novel as f64 / summary.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every occurrence counts.
    #[default]
    Occurrence,
    /// Each distinct word counts once per field.
    Unique,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "occurrence" => Ok(Weighting::Occurrence),
            "unique" => Ok(Weighting::Unique),
            _ => Err(Error::InvalidArgument(format!(
                "unknown weighting {s:?}, expected occurrence or unique"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub stats: CorpusStats,
    pub tally: SplitTally,
    pub oov: OovTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub records: usize,
    pub skipped: Vec<String>,
    pub weighting: Weighting,
    pub source: FieldReport,
    pub summary: FieldReport,
    pub mean_novelty: f64,
    pub mean_summary_tokens: f64,
}

fn field_words(records: &[&DatasetRecord], field: Field, weighting: Weighting) -> WordCounts {
    let mut words = WordCounts::new();
    for r in records {
        words.add_text(r.field(field));
    }
    match weighting {
        Weighting::Occurrence => words,
        Weighting::Unique => words.to_unique(),
    }
}

/// Number of tokens a text is encoded into.
pub fn text_token_count<S: Segmenter + ?Sized>(seg: &S, text: &str) -> usize {
    pretokenize(text)
        .into_iter()
        .map(|w| seg.segment(w).tokens.len())
        .sum()
}

/// Splits records into those with a usable summary and the ids of the rest.
pub(crate) fn usable_records(records: &[DatasetRecord]) -> (Vec<&DatasetRecord>, Vec<String>) {
    let mut kept = Vec::with_capacity(records.len());
    let mut skipped = Vec::new();
    for r in records {
        if normalize_words(&r.summary).is_empty() {
            log::warn!("record {}: summary empty after normalization, skipped", r.id);
            skipped.push(r.id.clone());
        } else {
            kept.push(r);
        }
    }
    (kept, skipped)
}

/// Dataset-level statistics over source documents and reference summaries.
pub fn corpus_report<S: Segmenter + ?Sized>(
    seg: &S,
    records: &[DatasetRecord],
    lexicon: &DomainLexicon,
    weighting: Weighting,
) -> Result<CorpusReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("record list"));
    }
    let (kept, skipped) = usable_records(records);
    if kept.is_empty() {
        return Err(Error::EmptyInput("no record has a usable summary"));
    }
    let field = |f: Field| -> Result<FieldReport> {
        let words = field_words(&kept, f, weighting);
        let stats = corpus_stats(seg, &words)?;
        Ok(FieldReport {
            tally: tally(seg, &words),
            oov: oov_tally(seg, &words, lexicon),
            stats,
        })
    };
    let source = field(Field::Source)?;
    let summary = field(Field::Summary)?;

    let novelty: Vec<f64> = kept
        .par_iter()
        .map(|r| novelty_fraction(r))
        .collect::<Result<_>>()?;
    let tokens: Vec<usize> = kept
        .par_iter()
        .map(|r| text_token_count(seg, &r.summary))
        .collect();
    let n = kept.len() as f64;
    Ok(CorpusReport {
        records: kept.len(),
        skipped,
        weighting,
        source,
        summary,
        mean_novelty: novelty.iter().sum::<f64>() / n,
        mean_summary_tokens: tokens.iter().sum::<usize>() as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerField {
    #[serde(rename = "SD")]
    pub source: f64,
    #[serde(rename = "RS")]
    pub summary: f64,
}

/// Report laid out with the dataset-statistics column names. Percentages
/// are in [0, 100].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatsRow {
    #[serde(rename = "Test Set Size")]
    pub test_set_size: usize,
    #[serde(rename = "Token Count of Reference Summaries")]
    pub summary_tokens: f64,
    #[serde(rename = "OOV Concentration Split more than once (in %)")]
    pub split_gt1_pct: PerField,
    #[serde(rename = "OOV Concentration Split more than thrice (in %)")]
    pub split_gt3_pct: PerField,
    #[serde(rename = "Unigram Novelty (in %)")]
    pub novelty_pct: f64,
    #[serde(rename = "Fragment Score")]
    pub fragment_score: PerField,
    #[serde(rename = "Medical All-OOV Concentration (in %)")]
    pub all_oov_pct: PerField,
    #[serde(rename = "Medical Difficult-OOV Concentration (in %)")]
    pub difficult_oov_pct: PerField,
    #[serde(rename = "Weighting")]
    pub weighting: Weighting,
    #[serde(rename = "Skipped Records")]
    pub skipped: Vec<String>,
}

impl CorpusReport {
    pub fn to_row(&self) -> DatasetStatsRow {
        let pf = |f: &dyn Fn(&FieldReport) -> f64| PerField {
            source: f(&self.source),
            summary: f(&self.summary),
        };
        DatasetStatsRow {
            test_set_size: self.records,
            summary_tokens: self.mean_summary_tokens,
            split_gt1_pct: pf(&|r| 100.0 * r.stats.split_gt1_fraction),
            split_gt3_pct: pf(&|r| 100.0 * r.stats.split_gt3_fraction),
            novelty_pct: 100.0 * self.mean_novelty,
            fragment_score: pf(&|r| r.stats.fragment_score),
            all_oov_pct: pf(&|r| 100.0 * r.oov.all_concentration()),
            difficult_oov_pct: pf(&|r| 100.0 * r.oov.difficult_concentration()),
            weighting: self.weighting,
            skipped: self.skipped.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::Tokenizer;

    /// Every word is split into one subword per character, no marker.
    fn chars_tok() -> Tokenizer {
        let tokens = ('a'..='z').map(|c| c.to_string()).collect();
        Tokenizer::from_parts("", tokens, vec![], vec![]).unwrap()
    }

    fn wc(items: &[(&str, u64)]) -> WordCounts {
        items.iter().copied().collect()
    }

    #[test]
    fn fragment_score_of_single_subwords_is_one() {
        let t = chars_tok();
        assert_eq!(fragment_score(&t, &wc(&[("a", 3), ("b", 1)])).unwrap(), 1.0);
        assert!(matches!(fragment_score(&t, &WordCounts::new()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn fragment_score_averages() {
        let t = chars_tok();
        assert_eq!(fragment_score(&t, &wc(&[("ab", 1), ("abc", 1)])).unwrap(), 2.5);
        assert_eq!(fragment_score(&t, &wc(&[("ab", 3), ("abcd", 1)])).unwrap(), 2.5);
    }

    #[test]
    fn split_fraction_counts() {
        let t = chars_tok();
        assert_eq!(split_gt_fraction(&t, &wc(&[("ab", 2), ("cd", 1)]), 3).unwrap(), 0.0);
        assert_eq!(split_gt_fraction(&t, &wc(&[("abcdef", 1), ("ab", 1)]), 3).unwrap(), 0.5);
        assert!(split_gt_fraction(&t, &WordCounts::new(), 1).is_err());
    }

    #[test]
    fn oov_words_respect_lexicon_and_threshold() {
        let t = chars_tok();
        let lex = DomainLexicon::parse("abcde\nab\nz").unwrap();
        let text = "ABCDE ab the z abcde ab.";
        let all = oov_words(&t, text, &lex, false);
        assert_eq!(
            all,
            vec![
                OovWord { word: "abcde".into(), subword_count: 5, occurrences: 2 },
                OovWord { word: "ab".into(), subword_count: 2, occurrences: 2 },
            ]
        );
        let hard = oov_words(&t, text, &lex, true);
        assert_eq!(hard.len(), 1);
        assert!(oov_words(&t, "nothing here", &lex, false).is_empty());
    }

    #[test]
    fn novelty_examples() {
        let r = DatasetRecord::new("x", "", "the drug reduced pain", "the drug cured migraine");
        assert_eq!(novelty_fraction(&r).unwrap(), 0.5);
        let r = DatasetRecord::new("x", "", "the drug reduced pain", "Drug, pain.");
        assert_eq!(novelty_fraction(&r).unwrap(), 0.0);
        let r = DatasetRecord::new("x", "", "text", "...");
        assert!(matches!(novelty_fraction(&r), Err(Error::EmptySummary(_))));
    }

    #[test]
    fn report_with_summary_equal_to_source() {
        let t = chars_tok();
        let lex = DomainLexicon::parse("drug").unwrap();
        let r = DatasetRecord::new("1", "", "the drug reduced pain", "the drug reduced pain");
        let rep = corpus_report(&t, &[r], &lex, Weighting::Occurrence).unwrap();
        assert_eq!(rep.mean_novelty, 0.0);
        assert_eq!(rep.source, rep.summary);
        assert_eq!(rep.summary.oov.all_oov, 1);
        let row = rep.to_row();
        assert_eq!(row.test_set_size, 1);
        assert_eq!(row.split_gt1_pct.source, 100.0);
    }

    #[test]
    fn report_skips_unusable_summaries() {
        let t = chars_tok();
        let lex = DomainLexicon::default();
        let recs = vec![
            DatasetRecord::new("1", "", "a b", "a"),
            DatasetRecord::new("2", "", "a b", "!!"),
        ];
        let rep = corpus_report(&t, &recs, &lex, Weighting::Unique).unwrap();
        assert_eq!(rep.records, 1);
        assert_eq!(rep.skipped, vec!["2".to_string()]);
        assert!(corpus_report(&t, &[], &lex, Weighting::Occurrence).is_err());
    }
}
