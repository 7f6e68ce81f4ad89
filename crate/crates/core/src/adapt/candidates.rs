use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bpe::{BpeTrainer, Tokenizer};
use crate::dataset::DomainLexicon;
use crate::error::{Error, Result};
use crate::words::WordCounts;

/// Which corpus a candidate vocabulary was trained on: the domain-specific
/// abstract collection or the downstream task data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    #[serde(rename = "PAC")]
    Pac,
    #[serde(rename = "TGT")]
    Tgt,
}

/// Learned (non-character) tokens of a BPE vocabulary trained on domain OOV
/// words, in learning order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateVocab {
    pub tokens: Vec<(String, u64)>,
    pub source_tag: SourceTag,
    /// Requested vocabulary size.
    pub config_size: usize,
    /// Size actually reached; smaller than `config_size` when the corpus ran
    /// out of pairs.
    pub actual_size: usize,
    pub marker: String,
}

impl CandidateVocab {
    pub fn reached_size(&self) -> bool {
        self.actual_size >= self.config_size
    }

    /// Token strings with this vocabulary's marker rewritten to `marker`.
    pub fn normalized_tokens<'a>(&'a self, marker: &'a str) -> impl Iterator<Item = String> + 'a {
        self.tokens.iter().map(move |(t, _)| {
            match t.strip_prefix(self.marker.as_str()) {
                Some(rest) if !self.marker.is_empty() => format!("{marker}{rest}"),
                _ => t.clone(),
            }
        })
    }
}

/// Lexicon words of `corpus` that `t` splits into more than one subword,
/// lowercased, with their corpus frequencies.
pub fn extract_candidate_words(
    t: &Tokenizer,
    corpus: &WordCounts,
    lexicon: &DomainLexicon,
) -> Result<WordCounts> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut out = WordCounts::new();
    for (word, count) in corpus.iter() {
        if lexicon.contains(word) && t.tokenize_word(word).subword_count > 1 {
            out.add(&word.to_lowercase(), count);
        }
    }
    if out.is_empty() {
        return Err(Error::NothingToAdapt);
    }
    Ok(out)
}

/// Trains one BPE run over `words` and snapshots the learned tokens each time
/// the vocabulary reaches the next size in `sizes`. The alphabet counts the
/// marker as one symbol. Token frequency is the weighted pair count at the
/// moment the token was learned.
pub fn build_candidate_vocab(
    words: &WordCounts,
    sizes: &[usize],
    marker: &str,
    source_tag: SourceTag,
) -> Result<Vec<CandidateVocab>> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("size grid is empty".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "size grid must be strictly ascending: {sizes:?}"
        )));
    }
    let mut trainer = BpeTrainer::new(words, marker)?;
    let alphabet = trainer.alphabet_len();
    if sizes[0] <= alphabet {
        return Err(Error::InvalidArgument(format!(
            "size {} does not exceed the alphabet of {alphabet} symbols",
            sizes[0]
        )));
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut tokens: Vec<(String, u64)> = Vec::new();
    let mut seen = HashSet::new();
    let mut exhausted = false;
    for &size in sizes {
        while !exhausted && trainer.vocab_size() < size {
            match trainer.step() {
                Some(m) => {
                    let merged = m.merged();
                    if seen.insert(merged.clone()) {
                        tokens.push((merged, m.count));
                    }
                }
                None => exhausted = true,
            }
        }
        if exhausted {
            log::warn!(
                "candidate vocabulary size {size} unreachable, stopped at {}",
                trainer.vocab_size()
            );
        }
        out.push(CandidateVocab {
            tokens: tokens.clone(),
            source_tag,
            config_size: size,
            actual_size: trainer.vocab_size(),
            marker: marker.to_owned(),
        });
    }
    Ok(out)
}
