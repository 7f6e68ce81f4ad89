//! Greedy BPE training over a weighted word multiset.
//!
//! Pair counts are maintained incrementally: merging a pair only rescans the
//! words that contain it, and a lazily invalidated heap yields the next best
//! pair. Selection order is highest weighted count, then the
//! lexicographically smallest (left, right). A pair is learned at most once.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use super::Tokenizer;
use crate::error::{Error, Result};
use crate::text::is_digit;
use crate::words::WordCounts;

type Pair = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainedMerge {
    pub left: String,
    pub right: String,
    /// Weighted adjacency count of the pair when it was selected.
    pub count: u64,
}

impl TrainedMerge {
    pub fn merged(&self) -> String {
        format!("{}{}", self.left, self.right)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: String,
    right: String,
    pair: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct BpeTrainer {
    marker: String,
    symbols: Vec<String>,
    symbol_ids: HashMap<String, u32>,
    mergeable: Vec<bool>,
    alphabet_len: usize,
    words: Vec<(Vec<u32>, u64)>,
    pair_counts: HashMap<Pair, u64>,
    pair_words: HashMap<Pair, HashSet<usize>>,
    heap: BinaryHeap<Candidate>,
    learned: HashSet<Pair>,
    merges: Vec<TrainedMerge>,
}

impl BpeTrainer {
    pub fn new(words: &WordCounts, marker: &str) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut alphabet: Vec<char> = words.iter().flat_map(|(w, _)| w.chars()).collect();
        alphabet.sort_unstable();
        alphabet.dedup();

        let mut trainer = BpeTrainer {
            marker: marker.to_owned(),
            symbols: Vec::new(),
            symbol_ids: HashMap::new(),
            mergeable: Vec::new(),
            alphabet_len: 0,
            words: Vec::with_capacity(words.len()),
            pair_counts: HashMap::new(),
            pair_words: HashMap::new(),
            heap: BinaryHeap::new(),
            learned: HashSet::new(),
            merges: Vec::new(),
        };
        if !marker.is_empty() {
            trainer.intern(marker);
        }
        for c in alphabet {
            trainer.intern(&c.to_string());
        }
        trainer.alphabet_len = trainer.symbols.len();

        for (word, count) in words.iter() {
            let mut ids = Vec::with_capacity(word.len() + 1);
            if !marker.is_empty() {
                ids.push(trainer.symbol_ids[marker]);
            }
            ids.extend(word.chars().map(|c| trainer.symbol_ids[&c.to_string()]));
            trainer.words.push((ids, count));
        }
        for idx in 0..trainer.words.len() {
            trainer.add_word_pairs(idx, None);
        }
        let pairs: Vec<Pair> = trainer.pair_counts.keys().copied().collect();
        for pair in pairs {
            trainer.push_candidate(pair);
        }
        Ok(trainer)
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.symbol_ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        let mut chars = s.chars();
        let digit = matches!((chars.next(), chars.next()), (Some(c), None) if is_digit(c));
        self.symbols.push(s.to_owned());
        self.symbol_ids.insert(s.to_owned(), id);
        self.mergeable.push(!digit);
        id
    }

    fn word_pairs(&self, idx: usize) -> Vec<Pair> {
        self.words[idx]
            .0
            .windows(2)
            .filter(|w| self.mergeable[w[0] as usize] && self.mergeable[w[1] as usize])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    fn add_word_pairs(&mut self, idx: usize, changed: Option<&mut HashSet<Pair>>) {
        let count = self.words[idx].1;
        let pairs = self.word_pairs(idx);
        let mut changed = changed;
        for pair in pairs {
            *self.pair_counts.entry(pair).or_insert(0) += count;
            self.pair_words.entry(pair).or_default().insert(idx);
            if let Some(set) = changed.as_deref_mut() {
                set.insert(pair);
            }
        }
    }

    fn remove_word_pairs(&mut self, idx: usize, changed: &mut HashSet<Pair>) {
        let count = self.words[idx].1;
        for pair in self.word_pairs(idx) {
            if let Some(c) = self.pair_counts.get_mut(&pair) {
                *c -= count;
            }
            changed.insert(pair);
        }
    }

    fn push_candidate(&mut self, pair: Pair) {
        let count = self.pair_counts.get(&pair).copied().unwrap_or(0);
        if count == 0 || self.learned.contains(&pair) {
            return;
        }
        self.heap.push(Candidate {
            count,
            left: self.symbols[pair.0 as usize].clone(),
            right: self.symbols[pair.1 as usize].clone(),
            pair,
        });
    }

    /// Number of initial symbols: the marker (if any) plus every distinct
    /// character of the corpus.
    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    /// Current vocabulary size (alphabet plus distinct merged symbols).
    pub fn vocab_size(&self) -> usize {
        self.symbols.len()
    }

    pub fn merges(&self) -> &[TrainedMerge] {
        &self.merges
    }

    /// Learns one merge. Returns `None` once no mergeable pair is left.
    pub fn step(&mut self) -> Option<&TrainedMerge> {
        let best = loop {
            let cand = self.heap.pop()?;
            let current = self.pair_counts.get(&cand.pair).copied().unwrap_or(0);
            if current == cand.count && current > 0 && !self.learned.contains(&cand.pair) {
                break cand;
            }
        };
        let (a, b) = best.pair;
        self.learned.insert(best.pair);
        let merged_str = format!("{}{}", best.left, best.right);
        let merged = self.intern(&merged_str);

        let mut affected: Vec<usize> = self
            .pair_words
            .get(&best.pair)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        affected.sort_unstable();
        let mut changed = HashSet::new();
        for idx in affected {
            if !self.words[idx].0.windows(2).any(|w| w[0] == a && w[1] == b) {
                continue;
            }
            self.remove_word_pairs(idx, &mut changed);
            let ids = &mut self.words[idx].0;
            let mut out = Vec::with_capacity(ids.len());
            let mut i = 0;
            while i < ids.len() {
                if i + 1 < ids.len() && ids[i] == a && ids[i + 1] == b {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(ids[i]);
                    i += 1;
                }
            }
            *ids = out;
            self.add_word_pairs(idx, Some(&mut changed));
        }
        for pair in changed {
            self.push_candidate(pair);
        }
        self.merges.push(TrainedMerge {
            left: best.left,
            right: best.right,
            count: best.count,
        });
        self.merges.last()
    }

    pub fn into_tokenizer(self) -> Result<Tokenizer> {
        let merges = self
            .merges
            .into_iter()
            .map(|m| (m.left, m.right))
            .collect();
        Tokenizer::from_parts(self.marker, self.symbols, merges, Vec::new())
    }
}

/// Trains a tokenizer with at most `merge_budget` merges. Training stops
/// early when no pair is left; the returned tokenizer's merge count is the
/// number actually performed.
pub fn train_bpe(words: &WordCounts, merge_budget: usize, marker: &str) -> Result<Tokenizer> {
    let mut trainer = BpeTrainer::new(words, marker)?;
    for _ in 0..merge_budget {
        if trainer.step().is_none() {
            log::debug!(
                "bpe training stopped after {} of {merge_budget} merges",
                trainer.merges().len()
            );
            break;
        }
    }
    trainer.into_tokenizer()
}
