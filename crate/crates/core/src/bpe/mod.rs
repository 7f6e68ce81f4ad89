//! Merge-table BPE tokenizer with an explicit word-boundary marker.
//!
//! Symbols are Unicode characters. A word is tokenized by prepending the
//! marker as one atomic symbol, splitting the rest into characters and then
//! repeatedly applying the applicable merge with the lowest rank (leftmost
//! occurrence first) until none applies. Single digit symbols never merge.

mod io;
mod train;

use std::collections::{HashMap, HashSet};

pub use train::{train_bpe, BpeTrainer, TrainedMerge};

use crate::error::{Error, Result};
use crate::text::{is_digit, pretokenize};

/// Output of tokenizing one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizationResult {
    pub tokens: Vec<String>,
    /// Number of tokens that carry word characters. A bare marker token,
    /// which only AdaptBPE emits in practice, is a boundary symbol and is not
    /// counted.
    pub subword_count: usize,
    pub had_unknown_chars: bool,
}

/// Anything that splits a single pretokenized word into subwords.
pub trait Segmenter: Sync {
    fn segment(&self, word: &str) -> TokenizationResult;
}

fn mergeable(symbol: &str) -> bool {
    let mut chars = symbol.chars();
    !matches!((chars.next(), chars.next()), (Some(c), None) if is_digit(c))
}

#[derive(Debug, Clone, Copy)]
struct MergeRule {
    rank: u32,
    merged: u32,
}

#[derive(Debug, Clone)]
enum Symbol {
    Known(u32),
    Unknown(String),
}

/// Immutable vocabulary plus ordered merge table.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    marker: String,
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    merges: Vec<(String, String)>,
    rules: HashMap<(u32, u32), MergeRule>,
    added: Vec<String>,
}

impl PartialEq for Tokenizer {
    fn eq(&self, other: &Self) -> bool {
        self.marker == other.marker
            && self.tokens == other.tokens
            && self.merges == other.merges
            && self.added == other.added
    }
}

impl Eq for Tokenizer {}

impl Tokenizer {
    /// Builds a tokenizer from tokens listed in id order, validating every
    /// invariant of the merge table.
    pub fn from_parts(
        marker: impl Into<String>,
        tokens: Vec<String>,
        merges: Vec<(String, String)>,
        added: Vec<String>,
    ) -> Result<Self> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (id, token) in tokens.iter().enumerate() {
            if ids.insert(token.clone(), id as u32).is_some() {
                return Err(Error::InvalidTokenizer(format!(
                    "token {token:?} appears twice in vocab"
                )));
            }
        }
        let mut tokenizer = Tokenizer {
            marker: marker.into(),
            tokens,
            ids,
            merges: Vec::with_capacity(merges.len()),
            rules: HashMap::with_capacity(merges.len()),
            added: Vec::new(),
        };
        let mut seen = HashSet::with_capacity(merges.len());
        for (left, right) in merges {
            if !seen.insert((left.clone(), right.clone())) {
                return Err(Error::InvalidTokenizer(format!(
                    "duplicate merge {left:?} + {right:?}"
                )));
            }
            let merged = format!("{left}{right}");
            if !tokenizer.ids.contains_key(&merged) {
                return Err(Error::InvalidTokenizer(format!(
                    "merge target not in vocab: {left:?} + {right:?} -> {merged:?}"
                )));
            }
            tokenizer.index_merge(left, right);
        }
        for token in &added {
            if !tokenizer.ids.contains_key(token) {
                return Err(Error::InvalidTokenizer(format!(
                    "added token {token:?} not in vocab"
                )));
            }
        }
        tokenizer.added = added;
        Ok(tokenizer)
    }

    fn index_merge(&mut self, left: String, right: String) {
        let rank = self.merges.len() as u32;
        if let (Some(&l), Some(&r)) = (self.ids.get(&left), self.ids.get(&right)) {
            if mergeable(&left) && mergeable(&right) {
                let merged = self.ids[&format!("{left}{right}")];
                self.rules.insert((l, r), MergeRule { rank, merged });
            }
        }
        self.merges.push((left, right));
    }

    /// Appends a token, returning its id. Existing tokens keep their id.
    pub(crate) fn push_token(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }

    /// Appends a merge at the lowest priority. Returns false when the pair is
    /// already present. The concatenation must already be in the vocab.
    pub(crate) fn push_merge(&mut self, left: &str, right: &str) -> bool {
        if self.has_merge(left, right) {
            return false;
        }
        debug_assert!(self.ids.contains_key(&format!("{left}{right}")));
        self.index_merge(left.to_owned(), right.to_owned());
        true
    }

    /// Whether a merge of these two symbols could ever fire: both are in the
    /// vocabulary and neither is a single digit.
    pub fn can_merge(&self, left: &str, right: &str) -> bool {
        self.contains(left) && self.contains(right) && mergeable(left) && mergeable(right)
    }

    pub(crate) fn push_added(&mut self, token: &str) {
        self.added.push(token.to_owned());
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn has_merge(&self, left: &str, right: &str) -> bool {
        match (self.ids.get(left), self.ids.get(right)) {
            (Some(l), Some(r)) => self.rules.contains_key(&(*l, *r)),
            // Merges over unknown symbols never fire, but can still be listed.
            _ => self
                .merges
                .iter()
                .any(|(a, b)| a == left && b == right),
        }
    }

    pub fn added(&self) -> &[String] {
        &self.added
    }

    /// Removes a leading marker from a token surface, if present.
    pub fn strip_marker<'a>(&self, token: &'a str) -> &'a str {
        if self.marker.is_empty() {
            token
        } else {
            token.strip_prefix(self.marker.as_str()).unwrap_or(token)
        }
    }

    fn symbol(&self, s: &str) -> Symbol {
        match self.ids.get(s) {
            Some(&id) => Symbol::Known(id),
            None => Symbol::Unknown(s.to_owned()),
        }
    }

    fn initial_symbols(&self, text: &str, with_marker: bool) -> Vec<Symbol> {
        let mut symbols = Vec::with_capacity(text.len() + 1);
        if with_marker && !self.marker.is_empty() {
            symbols.push(self.symbol(&self.marker));
        }
        let mut buf = [0u8; 4];
        for c in text.chars() {
            symbols.push(self.symbol(c.encode_utf8(&mut buf)));
        }
        symbols
    }

    fn apply_merges(&self, symbols: &mut Vec<Symbol>) {
        loop {
            let mut best: Option<(MergeRule, usize)> = None;
            for (i, pair) in symbols.windows(2).enumerate() {
                if let [Symbol::Known(l), Symbol::Known(r)] = pair {
                    if let Some(rule) = self.rules.get(&(*l, *r)) {
                        if best.is_none_or(|(b, _)| rule.rank < b.rank) {
                            best = Some((*rule, i));
                        }
                    }
                }
            }
            match best {
                Some((rule, i)) => {
                    symbols[i] = Symbol::Known(rule.merged);
                    symbols.remove(i + 1);
                }
                None => break,
            }
        }
    }

    /// Runs the merge loop over `text` alone, optionally preceded by the
    /// marker. This is the building block for words and for the leftover
    /// segments of AdaptBPE.
    pub fn tokenize_segment(&self, text: &str, with_marker: bool) -> Vec<String> {
        let mut symbols = self.initial_symbols(text, with_marker);
        self.apply_merges(&mut symbols);
        symbols
            .into_iter()
            .map(|s| match s {
                Symbol::Known(id) => self.tokens[id as usize].clone(),
                Symbol::Unknown(s) => s,
            })
            .collect()
    }

    /// Wraps raw tokens into a [`TokenizationResult`].
    pub fn make_result(&self, tokens: Vec<String>) -> TokenizationResult {
        let subword_count = tokens
            .iter()
            .filter(|t| self.marker.is_empty() || t.as_str() != self.marker)
            .count();
        let had_unknown_chars = tokens.iter().any(|t| !self.ids.contains_key(t));
        TokenizationResult {
            tokens,
            subword_count,
            had_unknown_chars,
        }
    }

    pub fn tokenize_word(&self, word: &str) -> TokenizationResult {
        if word.is_empty() {
            return self.make_result(Vec::new());
        }
        self.make_result(self.tokenize_segment(word, true))
    }

    /// Pretokenizes `text` and tokenizes each piece in order.
    pub fn tokenize_text(&self, text: &str) -> Vec<TokenizationResult> {
        pretokenize(text)
            .into_iter()
            .map(|w| self.tokenize_word(w))
            .collect()
    }

    /// Base segmentation of a token surface: tokens that start with the
    /// marker are tokenized as a word, all others as a word-internal segment.
    pub fn segment_surface(&self, surface: &str) -> Vec<String> {
        match surface.strip_prefix(self.marker.as_str()) {
            Some(rest) if !self.marker.is_empty() => self.tokenize_segment(rest, true),
            _ => self.tokenize_segment(surface, false),
        }
    }
}

impl Segmenter for Tokenizer {
    fn segment(&self, word: &str) -> TokenizationResult {
        self.tokenize_word(word)
    }
}
