//! Grid searches that pick an added vocabulary by fragment score.
//!
//! Every configuration is evaluated independently. The final choice is the
//! smallest vocabulary whose utility lies within `(1 + tolerance)` of the
//! best utility on the grid, which avoids drifting toward the largest
//! configuration for a negligible gain.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_added_vocab, AddedVocabulary, CandidateVocab, Strategy};
use crate::adaptbpe::AdaptBpe;
use crate::bpe::Tokenizer;
use crate::error::{Error, Result};
use crate::metrics::fragment_score;
use crate::words::WordCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchConfig {
    Intersection { pac_size: usize, tgt_size: usize },
    Quota { quota: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub config: SearchConfig,
    pub utility: f64,
    /// Number of tokens the configuration adds.
    pub size: usize,
    /// Set when the configuration asked for more tokens than were available.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub chosen: usize,
    pub utility: f64,
    pub min_utility: f64,
    pub tolerance: f64,
    pub grid: Vec<GridEntry>,
    pub added: AddedVocabulary,
}

impl SearchResult {
    pub fn chosen_entry(&self) -> &GridEntry {
        &self.grid[self.chosen]
    }
}

/// `{50, 100, ..., 500}`.
pub fn default_quota_grid() -> Vec<usize> {
    (1..=10).map(|i| i * 50).collect()
}

/// Index of the smallest `(size, utility)` entry with utility within
/// `(1 + tolerance) * min`. Ties go to the lower utility, then the earlier
/// entry. Panics on an empty slice.
pub fn select_in_neighborhood(entries: &[(usize, f64)], tolerance: f64) -> usize {
    let min = entries
        .iter()
        .map(|e| e.1)
        .fold(f64::INFINITY, f64::min);
    let bound = (1.0 + tolerance) * min;
    let mut best: Option<usize> = None;
    for (i, &(size, utility)) in entries.iter().enumerate() {
        if utility > bound {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (bs, bu) = entries[b];
                size < bs || (size == bs && utility < bu)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.expect("at least one entry attains the minimum")
}

fn check_inputs(eval_words: &WordCounts, tolerance: f64) -> Result<()> {
    if eval_words.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be a finite value >= 0, got {tolerance}"
        )));
    }
    Ok(())
}

/// Searches every (PAC, TGT) candidate pair: intersects their token sets,
/// injects the intersection with merge synthesis and scores the result.
/// Intersection tokens keep the TGT vocabulary's learning order.
pub fn medvoc_search(
    t: &Tokenizer,
    pac: &[CandidateVocab],
    tgt: &[CandidateVocab],
    eval_words: &WordCounts,
    tolerance: f64,
) -> Result<SearchResult> {
    check_inputs(eval_words, tolerance)?;
    if pac.is_empty() || tgt.is_empty() {
        return Err(Error::EmptyInput("candidate vocabulary grid"));
    }
    let mut configs = Vec::new();
    for p in pac {
        let pac_tokens: HashSet<String> = p.normalized_tokens(t.marker()).collect();
        for g in tgt {
            let inter: Vec<String> = g
                .normalized_tokens(t.marker())
                .filter(|tok| pac_tokens.contains(tok))
                .collect();
            if inter.is_empty() {
                log::debug!(
                    "empty intersection for pac={} tgt={}",
                    p.config_size,
                    g.config_size
                );
                continue;
            }
            let config = SearchConfig::Intersection {
                pac_size: p.config_size,
                tgt_size: g.config_size,
            };
            configs.push((config, inter, !(p.reached_size() && g.reached_size())));
        }
    }
    if configs.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let evaluated: Vec<(GridEntry, AddedVocabulary)> = configs
        .into_par_iter()
        .map(|(config, inter, truncated)| {
            let added = AddedVocabulary::synthesize(t, &inter, Strategy::Medvoc);
            let extended = apply_added_vocab(t, &added)?;
            let utility = fragment_score(&extended, eval_words)?;
            let entry = GridEntry {
                config,
                utility,
                size: inter.len(),
                truncated,
            };
            Ok((entry, added))
        })
        .collect::<Result<_>>()?;
    Ok(finish(evaluated, tolerance))
}

fn finish(evaluated: Vec<(GridEntry, AddedVocabulary)>, tolerance: f64) -> SearchResult {
    let pairs: Vec<(usize, f64)> = evaluated.iter().map(|(e, _)| (e.size, e.utility)).collect();
    let chosen = select_in_neighborhood(&pairs, tolerance);
    let min_utility = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (grid, mut vocabs): (Vec<_>, Vec<_>) = evaluated.into_iter().unzip();
    SearchResult {
        chosen,
        utility: grid[chosen].utility,
        min_utility,
        tolerance,
        added: vocabs.swap_remove(chosen),
        grid,
    }
}

/// Takes the top-`quota` words by descending frequency (ties ascending) for
/// every quota on the grid and scores each under AdaptBPE.
pub fn scaffix_select(
    words: &WordCounts,
    quota_grid: &[usize],
    t: &Tokenizer,
    eval_words: &WordCounts,
    tolerance: f64,
) -> Result<SearchResult> {
    check_inputs(eval_words, tolerance)?;
    if words.is_empty() {
        return Err(Error::NothingToAdapt);
    }
    if quota_grid.is_empty() {
        return Err(Error::EmptyInput("quota grid"));
    }
    let ranked: Vec<&str> = words.ranked().into_iter().map(|(w, _)| w).collect();
    let evaluated: Vec<(GridEntry, AddedVocabulary)> = quota_grid
        .par_iter()
        .map(|&quota| {
            let take = quota.min(ranked.len());
            if take < quota {
                log::warn!("quota {quota} exceeds {} candidate words", ranked.len());
            }
            let added = AddedVocabulary::scaffix(ranked[..take].iter().copied());
            let extended = apply_added_vocab(t, &added)?;
            let utility = fragment_score(&AdaptBpe::new(&extended), eval_words)?;
            let entry = GridEntry {
                config: SearchConfig::Quota { quota },
                utility,
                size: take,
                truncated: take < quota,
            };
            Ok((entry, added))
        })
        .collect::<Result<_>>()?;
    Ok(finish(evaluated, tolerance))
}
