//! Summarization records and the domain lexicon.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::WordCounts;

/// One query-focused summarization example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    #[serde(default)]
    pub query: String,
    /// Source document.
    pub source: String,
    /// Reference summary.
    pub summary: String,
}

impl DatasetRecord {
    pub fn new(
        id: impl Into<String>,
        query: impl Into<String>,
        source: impl Into<String>,
        summary: impl Into<String>,
    ) -> Self {
        DatasetRecord {
            id: id.into(),
            query: query.into(),
            source: source.into(),
            summary: summary.into(),
        }
    }

    pub fn field(&self, field: Field) -> &str {
        match field {
            Field::Source => &self.source,
            Field::Summary => &self.summary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "SD")]
    Source,
    #[serde(rename = "RS")]
    Summary,
}

/// Parses JSON-Lines records. Blank lines are skipped; ids must be unique
/// and source/summary non-empty.
pub fn parse_jsonl(text: &str) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(format!("dataset line {}", lineno + 1), e))?;
        if record.source.trim().is_empty() || record.summary.trim().is_empty() {
            return Err(Error::parse(
                format!("dataset line {}", lineno + 1),
                format!("record {:?} has an empty source or summary", record.id),
            ));
        }
        if !ids.insert(record.id.clone()) {
            return Err(Error::DuplicateRecord(record.id));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text)
}

pub fn to_jsonl(records: &[DatasetRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Set of lowercase domain ("medical") words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainLexicon {
    words: BTreeSet<String>,
}

impl DomainLexicon {
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            let w = w.as_ref().trim();
            if w.is_empty() {
                continue;
            }
            if w.chars().any(char::is_whitespace) {
                return Err(Error::parse("lexicon", format!("entry {w:?} contains whitespace")));
            }
            set.insert(w.to_lowercase());
        }
        Ok(DomainLexicon { words: set })
    }

    /// Builds a lexicon as the domain corpus vocabulary minus a general
    /// wordlist. Only words made of letters are kept.
    pub fn from_corpus_difference(domain: &WordCounts, general: &HashSet<String>) -> Self {
        let words = domain
            .iter()
            .map(|(w, _)| w.to_lowercase())
            .filter(|w| w.chars().all(char::is_alphabetic))
            .filter(|w| !general.contains(w))
            .collect();
        DomainLexicon { words }
    }

    pub fn parse(text: &str) -> Result<Self> {
        DomainLexicon::from_words(text.lines())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DomainLexicon::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    /// Case-insensitive membership.
    pub fn contains(&self, word: &str) -> bool {
        if word.chars().any(char::is_uppercase) {
            self.words.contains(&word.to_lowercase())
        } else {
            self.words.contains(word)
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.words.iter().map(String::as_str)
    }
}

/// Reads a plain wordlist (one word per line) into a lowercase set.
pub fn load_wordlist(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect())
}
