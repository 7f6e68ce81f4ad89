//! AdaptBPE: keep added-vocabulary matches whole, BPE the rest.
//!
//! The word is marker-prefixed as usual. The longest added entry occurring
//! in the word characters (leftmost among equal lengths) is emitted as one
//! token; the prefix and suffix segments are processed the same way, and a
//! segment without any match goes through the ordinary merge loop. Matches
//! never consume the marker, so a match at the very start of the word leaves
//! the marker as a token of its own.
//!
//! Words the base tokenizer already encodes as a single subword are returned
//! unchanged.

use std::collections::{BTreeSet, HashMap};

use crate::bpe::{Segmenter, TokenizationResult, Tokenizer};

#[derive(Debug, Clone, Default)]
struct Node {
    children: HashMap<char, u32>,
    terminal: bool,
}

/// Character trie over the added entries.
#[derive(Debug, Clone)]
pub struct MatchIndex {
    nodes: Vec<Node>,
    entries: BTreeSet<String>,
    max_len: usize,
}

/// A match in character offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub start: usize,
    pub len: usize,
}

impl MatchIndex {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index = MatchIndex {
            nodes: vec![Node::default()],
            entries: BTreeSet::new(),
            max_len: 0,
        };
        for e in entries {
            index.insert(e.as_ref());
        }
        index
    }

    fn insert(&mut self, entry: &str) {
        if entry.is_empty() || !self.entries.insert(entry.to_owned()) {
            return;
        }
        let mut node = 0usize;
        let mut len = 0;
        for c in entry.chars() {
            len += 1;
            node = match self.nodes[node].children.get(&c) {
                Some(&next) => next as usize,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.insert(c, next as u32);
                    next
                }
            };
        }
        self.nodes[node].terminal = true;
        self.max_len = self.max_len.max(len);
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Length in characters of the longest entry.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, s: &str) -> bool {
        self.entries.contains(s)
    }

    /// Longest entry starting exactly at `chars[0]`, in characters.
    fn longest_prefix(&self, chars: &[char]) -> usize {
        let mut node = 0usize;
        let mut best = 0;
        for (i, c) in chars.iter().enumerate() {
            match self.nodes[node].children.get(c) {
                Some(&next) => node = next as usize,
                None => break,
            }
            if self.nodes[node].terminal {
                best = i + 1;
            }
        }
        best
    }

    pub fn longest_match_chars(&self, chars: &[char]) -> Option<Match> {
        let mut best: Option<Match> = None;
        for start in 0..chars.len() {
            let len = self.longest_prefix(&chars[start..]);
            if len > best.map_or(0, |m| m.len) {
                best = Some(Match { start, len });
                if len == self.max_len {
                    break;
                }
            }
        }
        best
    }

    /// Longest entry occurring in `s`, leftmost among equal lengths.
    pub fn longest_match(&self, s: &str) -> Option<Match> {
        let chars: Vec<char> = s.chars().collect();
        self.longest_match_chars(&chars)
    }
}

/// AdaptBPE segmenter over a tokenizer and its added vocabulary.
#[derive(Debug, Clone)]
pub struct AdaptBpe<'a> {
    tokenizer: &'a Tokenizer,
    index: MatchIndex,
}

impl<'a> AdaptBpe<'a> {
    /// Uses the tokenizer's `added` tokens, marker-stripped, as entries.
    pub fn new(tokenizer: &'a Tokenizer) -> Self {
        let entries = tokenizer
            .added()
            .iter()
            .map(|t| tokenizer.strip_marker(t).to_owned());
        AdaptBpe {
            tokenizer,
            index: MatchIndex::new(entries),
        }
    }

    pub fn with_index(tokenizer: &'a Tokenizer, index: MatchIndex) -> Self {
        AdaptBpe { tokenizer, index }
    }

    pub fn index(&self) -> &MatchIndex {
        &self.index
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        self.tokenizer
    }

    pub fn tokenize_word(&self, word: &str) -> TokenizationResult {
        let base = self.tokenizer.tokenize_word(word);
        if base.subword_count <= 1 || self.index.is_empty() {
            return base;
        }
        let chars: Vec<char> = word.chars().collect();
        let mut tokens = Vec::new();
        self.split(&chars, true, &mut tokens);
        self.tokenizer.make_result(tokens)
    }

    fn split(&self, chars: &[char], with_marker: bool, out: &mut Vec<String>) {
        match self.index.longest_match_chars(chars) {
            Some(m) => {
                self.split(&chars[..m.start], with_marker, out);
                out.push(chars[m.start..m.start + m.len].iter().collect());
                self.split(&chars[m.start + m.len..], false, out);
            }
            None if chars.is_empty() && !with_marker => {}
            None => {
                let text: String = chars.iter().collect();
                out.extend(self.tokenizer.tokenize_segment(&text, with_marker));
            }
        }
    }
}

impl Segmenter for AdaptBpe<'_> {
    fn segment(&self, word: &str) -> TokenizationResult {
        self.tokenize_word(word)
    }
}
