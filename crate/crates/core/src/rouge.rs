//! Rouge-L (LCS-based F-measure, beta = 1).
//!
//! Texts are normalized exactly like the novelty statistics: lowercased,
//! punctuation removed, split on whitespace.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize_words;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub lcs_len: usize,
}

impl RougeScore {
    fn from_counts(lcs: usize, reference_len: usize, hypothesis_len: usize) -> Self {
        if lcs == 0 {
            return RougeScore {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
                lcs_len: 0,
            };
        }
        let precision = lcs as f64 / hypothesis_len as f64;
        let recall = lcs as f64 / reference_len as f64;
        RougeScore {
            precision,
            recall,
            f1: 2.0 * precision * recall / (precision + recall),
            lcs_len: lcs,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RougeVariant {
    /// Whole texts as single sequences.
    #[default]
    Sentence,
    /// Summary-level union LCS over sentences split at `.`, `!`, `?` and
    /// newlines.
    SummaryUnion,
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// Positions in `a` of one longest common subsequence with `b`.
fn lcs_positions<T: PartialEq>(a: &[T], b: &[T]) -> Vec<usize> {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![vec![0usize; m + 1]; n + 1];
    for i in 0..n {
        for j in 0..m {
            table[i + 1][j + 1] = if a[i] == b[j] {
                table[i][j] + 1
            } else {
                table[i][j + 1].max(table[i + 1][j])
            };
        }
    }
    let mut out = Vec::with_capacity(table[n][m]);
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            out.push(i - 1);
            i -= 1;
            j -= 1;
        } else if table[i - 1][j] >= table[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out.reverse();
    out
}

fn words_or_err(text: &str, side: &'static str) -> Result<Vec<String>> {
    let w = normalize_words(text);
    if w.is_empty() {
        Err(Error::EmptyInput(side))
    } else {
        Ok(w)
    }
}

/// Rouge-L between two token sequences. Both must be non-empty.
pub fn rouge_l_tokens<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> RougeScore {
    RougeScore::from_counts(
        lcs_len(reference, hypothesis),
        reference.len(),
        hypothesis.len(),
    )
}

pub fn rouge_l_f(reference: &str, hypothesis: &str) -> Result<RougeScore> {
    rouge_l_with(reference, hypothesis, RougeVariant::Sentence)
}

pub fn rouge_l_with(reference: &str, hypothesis: &str, variant: RougeVariant) -> Result<RougeScore> {
    let ref_words = words_or_err(reference, "reference")?;
    let hyp_words = words_or_err(hypothesis, "hypothesis")?;
    match variant {
        RougeVariant::Sentence => Ok(rouge_l_tokens(&ref_words, &hyp_words)),
        RougeVariant::SummaryUnion => {
            let hyp_sents = sentences(hypothesis);
            let mut hits = 0;
            for r in sentences(reference) {
                let mut union = HashSet::new();
                for h in &hyp_sents {
                    union.extend(lcs_positions(&r, h));
                }
                hits += union.len();
            }
            Ok(RougeScore::from_counts(hits, ref_words.len(), hyp_words.len()))
        }
    }
}

fn sentences(text: &str) -> Vec<Vec<String>> {
    text.split(['.', '!', '?', '\n'])
        .map(normalize_words)
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_len(&["a", "b", "c"], &["a", "b", "c"]), 3);
        assert_eq!(lcs_len(&["a", "b"], &["c", "d"]), 0);
        assert_eq!(lcs_len(&["a", "b", "c", "d"], &["a", "c", "d", "e"]), 3);
        assert_eq!(lcs_len::<&str>(&[], &["a"]), 0);
    }

    #[test]
    fn lcs_positions_form_a_common_subsequence() {
        let a = ["a", "b", "c", "d"];
        let b = ["a", "c", "d", "e"];
        let pos = lcs_positions(&a, &b);
        assert_eq!(pos, vec![0, 2, 3]);
    }

    #[test]
    fn rouge_examples() {
        let s = rouge_l_f("a b c d", "a c d e").unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.lcs_len), (0.75, 0.75, 0.75, 3));
        assert_eq!(rouge_l_f("Same text.", "same text").unwrap().f1, 1.0);
        let z = rouge_l_f("a b", "c d").unwrap();
        assert_eq!((z.f1, z.lcs_len), (0.0, 0));
        assert!(rouge_l_f("", "a").is_err());
        assert!(rouge_l_f("a", "!!").is_err());
    }

    #[test]
    fn summary_union_matches_sentence_level_on_one_sentence() {
        let a = rouge_l_with("a b c d", "a c d e", RougeVariant::SummaryUnion).unwrap();
        assert_eq!(a.f1, 0.75);
    }

    #[test]
    fn summary_union_credits_across_sentences() {
        // reference: "a b. c d"; hypothesis sentences reorder the pieces.
        let s = rouge_l_with("a b. c d.", "c d. a b.", RougeVariant::SummaryUnion).unwrap();
        assert_eq!(s.lcs_len, 4);
        let flat = rouge_l_f("a b. c d.", "c d. a b.").unwrap();
        assert_eq!(flat.lcs_len, 2);
    }
}
