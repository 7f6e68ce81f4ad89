//! Vocabulary adaptation: choosing domain tokens and injecting them into a
//! tokenizer.
//!
//! Merge-based strategies make each target reachable by appending merges
//! that pair up its base segmentation left to right. Every prefix produced
//! along the way that is neither a target nor already in the vocabulary is a
//! scaffold token. ScafFix instead records whole words in `added` with no
//! merges; they are consumed by [`crate::adaptbpe::AdaptBpe`].

mod candidates;
mod clean;
mod search;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::str::FromStr;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use candidates::{build_candidate_vocab, extract_candidate_words, CandidateVocab, SourceTag};
pub use clean::medvoc_llm_clean;
pub use search::{
    default_quota_grid, medvoc_search, scaffix_select, select_in_neighborhood, GridEntry,
    SearchConfig, SearchResult,
};

use crate::bpe::Tokenizer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "MEDVOC")]
    Medvoc,
    #[serde(rename = "MEDVOC_LLM")]
    MedvocLlm,
    #[serde(rename = "SCAFFIX")]
    Scaffix,
}

impl Strategy {
    pub fn uses_merges(self) -> bool {
        !matches!(self, Strategy::Scaffix)
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Medvoc => "MEDVOC",
            Strategy::MedvocLlm => "MEDVOC_LLM",
            Strategy::Scaffix => "SCAFFIX",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Case-insensitive; `-` and `_` are interchangeable.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        [Strategy::Medvoc, Strategy::MedvocLlm, Strategy::Scaffix]
            .into_iter()
            .find(|x| x.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

/// Tokens and merges that make one target reachable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Synthesis {
    /// New vocabulary entries in creation order; the target is last unless
    /// it was already in the vocabulary.
    pub new_tokens: Vec<String>,
    pub new_merges: Vec<(String, String)>,
}

impl Synthesis {
    pub fn is_empty(&self) -> bool {
        self.new_tokens.is_empty() && self.new_merges.is_empty()
    }
}

/// Tokens and merges that make `target` encode to one token under `t`.
/// Empty when it already does.
///
/// The first two pieces of the current segmentation are merged and the
/// target is re-segmented with the new merge in place, until one piece is
/// left. Without interference this pairs the base segmentation left to
/// right; re-segmenting keeps the target reachable when an earlier new
/// merge fires in more places than intended. Targets whose pieces can never
/// merge (single digits, unknown characters) stop early with a warning.
pub fn synthesize_merges(t: &Tokenizer, target: &str) -> Synthesis {
    let mut scratch = t.clone();
    synthesize_into(&mut scratch, target)
}

/// [`synthesize_merges`] applied to `t` directly.
fn synthesize_into(t: &mut Tokenizer, target: &str) -> Synthesis {
    let mut out = Synthesis::default();
    let mut seg = t.segment_surface(target);
    while seg.len() > 1 {
        let (left, right) = (&seg[0], &seg[1]);
        if !t.can_merge(left, right) || t.has_merge(left, right) {
            log::warn!("target {target:?} is not reachable by merges");
            break;
        }
        let merged = format!("{left}{right}");
        if !t.contains(&merged) {
            t.push_token(&merged);
            t.push_added(&merged);
            out.new_tokens.push(merged);
        }
        t.push_merge(left, right);
        out.new_merges.push((left.clone(), right.clone()));
        let next = t.segment_surface(target);
        debug_assert!(next.len() < seg.len(), "a new lowest-priority merge always fires");
        seg = next;
    }
    out
}

/// Domain tokens chosen by one strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedVocabulary {
    pub strategy: Strategy,
    pub tokens: Vec<String>,
    #[serde(rename = "merges")]
    pub synthesized_merges: Vec<(String, String)>,
    #[serde(rename = "scaffolds")]
    pub scaffold_tokens: Vec<String>,
}

impl AddedVocabulary {
    /// Whole-word tokens, no merges, no scaffolds. Duplicates are dropped.
    pub fn scaffix<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let tokens = words
            .into_iter()
            .map(Into::into)
            .filter(|w: &String| seen.insert(w.clone()))
            .collect();
        AddedVocabulary {
            strategy: Strategy::Scaffix,
            tokens,
            synthesized_merges: Vec::new(),
            scaffold_tokens: Vec::new(),
        }
    }

    /// Synthesizes merges for each target in order, each against the
    /// tokenizer extended by all previous targets.
    pub fn synthesize<S: AsRef<str>>(t: &Tokenizer, targets: &[S], strategy: Strategy) -> Self {
        assert!(strategy.uses_merges(), "ScafFix vocabularies carry no merges");
        let mut extended = t.clone();
        let mut tokens = Vec::new();
        let mut merges = Vec::new();
        let mut target_set = HashSet::new();
        for target in targets {
            let target = target.as_ref();
            if !target_set.insert(target.to_owned()) {
                log::warn!("duplicate target {target:?} skipped");
                continue;
            }
            let syn = synthesize_into(&mut extended, target);
            tokens.extend(syn.new_tokens);
            merges.extend(syn.new_merges);
        }
        let scaffold_tokens = tokens
            .iter()
            .filter(|tok| !target_set.contains(*tok))
            .cloned()
            .collect();
        AddedVocabulary {
            strategy,
            tokens,
            synthesized_merges: merges,
            scaffold_tokens,
        }
    }

    /// Tokens that are not scaffolds.
    pub fn targets(&self) -> impl Iterator<Item = &str> + '_ {
        let scaffolds: HashSet<&str> = self.scaffold_tokens.iter().map(String::as_str).collect();
        self.tokens
            .iter()
            .map(String::as_str)
            .filter(move |t| !scaffolds.contains(t))
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty() && self.synthesized_merges.is_empty()
    }

    /// Checks the structural invariants against the tokenizer it extends.
    pub fn validate(&self, base: &Tokenizer) -> Result<()> {
        let tokens: HashSet<&str> = self.tokens.iter().map(String::as_str).collect();
        if let Some(s) = self.scaffold_tokens.iter().find(|s| !tokens.contains(s.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "scaffold {s:?} is not among the added tokens"
            )));
        }
        if self.strategy == Strategy::Scaffix
            && !(self.scaffold_tokens.is_empty() && self.synthesized_merges.is_empty())
        {
            return Err(Error::InvalidArgument(
                "a SCAFFIX vocabulary cannot carry merges or scaffolds".into(),
            ));
        }
        for (l, r) in &self.synthesized_merges {
            let merged = format!("{l}{r}");
            if !tokens.contains(merged.as_str()) && !base.contains(&merged) {
                return Err(Error::InvalidArgument(format!(
                    "merge {l:?} + {r:?} produces {merged:?}, which is neither added nor in the base vocab"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("added vocabulary serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::parse("added vocabulary", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AddedVocabulary::from_json_str(&json)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

/// Extends `t` with `v`; new ids follow the existing ones.
///
/// Merge-based vocabularies replay their recorded merges after all base
/// merges; a vocabulary without recorded merges (for example a hand-written
/// token list) has them synthesized target by target. ScafFix tokens only
/// enter the vocabulary and the `added` list.
pub fn apply_added_vocab(t: &Tokenizer, v: &AddedVocabulary) -> Result<Tokenizer> {
    v.validate(t)?;
    let mut out = t.clone();
    let already_added: HashSet<String> = t.added().iter().cloned().collect();
    match v.strategy {
        Strategy::Scaffix => {
            for token in &v.tokens {
                if already_added.contains(token) {
                    log::warn!("token {token:?} already added, skipped");
                    continue;
                }
                out.push_token(token);
                out.push_added(token);
            }
        }
        Strategy::Medvoc | Strategy::MedvocLlm if v.synthesized_merges.is_empty() => {
            for target in v.targets() {
                if already_added.contains(target) {
                    log::warn!("token {target:?} already added, skipped");
                    continue;
                }
                synthesize_into(&mut out, target);
            }
        }
        Strategy::Medvoc | Strategy::MedvocLlm => {
            for token in &v.tokens {
                if already_added.contains(token) || out.contains(token) {
                    log::warn!("token {token:?} already present, skipped");
                    continue;
                }
                out.push_token(token);
                out.push_added(token);
            }
            for (l, r) in &v.synthesized_merges {
                if !out.push_merge(l, r) {
                    log::warn!("merge {l:?} + {r:?} already present, skipped");
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldStats {
    pub targets: usize,
    pub scaffold_count: usize,
    pub overhead_fraction: f64,
}

/// Counts the distinct intermediates that merge synthesis would add for
/// `targets` against `t`, excluding the targets themselves.
pub fn scaffolding_stats<S: AsRef<str>>(t: &Tokenizer, targets: &[S]) -> ScaffoldStats {
    let target_set: HashSet<&str> = targets.iter().map(AsRef::as_ref).collect();
    let mut scaffolds = HashSet::new();
    for target in &target_set {
        for tok in synthesize_merges(t, target).new_tokens {
            if !target_set.contains(tok.as_str()) {
                scaffolds.insert(tok);
            }
        }
    }
    let scaffold_count = scaffolds.len();
    let denom = scaffold_count + target_set.len();
    ScaffoldStats {
        targets: target_set.len(),
        scaffold_count,
        overhead_fraction: if denom == 0 {
            0.0
        } else {
            scaffold_count as f64 / denom as f64
        },
    }
}
