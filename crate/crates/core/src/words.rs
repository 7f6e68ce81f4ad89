use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::text::{is_punctuation, pretokenize};

/// Multiset of words, kept in order of first insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordCounts(IndexMap<String, u64>);

impl WordCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts the non-punctuation pieces of `text`, preserving case.
    pub fn from_text(text: &str) -> Self {
        let mut counts = WordCounts::new();
        counts.add_text(text);
        counts
    }

    pub fn add_text(&mut self, text: &str) {
        for piece in pretokenize(text) {
            if !piece.chars().all(is_punctuation) {
                self.add(piece, 1);
            }
        }
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        match self.0.get_mut(word) {
            Some(c) => *c += count,
            None => {
                self.0.insert(word.to_owned(), count);
            }
        }
    }

    pub fn merge(&mut self, other: &WordCounts) {
        for (w, c) in other.iter() {
            self.add(w, c);
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.0.get(word).copied().unwrap_or(0)
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of word occurrences.
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.0.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// Same words, each counted once.
    pub fn to_unique(&self) -> WordCounts {
        self.iter().map(|(w, _)| (w.to_owned(), 1)).collect()
    }

    /// Words sorted by descending count, ties by ascending word.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

impl FromIterator<(String, u64)> for WordCounts {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        let mut counts = WordCounts::new();
        for (w, c) in iter {
            counts.add(&w, c);
        }
        counts
    }
}

impl<'a> FromIterator<(&'a str, u64)> for WordCounts {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        let mut counts = WordCounts::new();
        for (w, c) in iter {
            counts.add(w, c);
        }
        counts
    }
}

impl<'a> FromIterator<&'a str> for WordCounts {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        iter.into_iter().map(|w| (w, 1)).collect()
    }
}
