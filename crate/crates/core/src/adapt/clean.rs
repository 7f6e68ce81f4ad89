use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::text::{is_digit, is_punctuation, normalize_words};

fn mixes_digits_or_punctuation(surface: &str) -> bool {
    surface.chars().count() > 1 && surface.chars().any(|c| is_digit(c) || is_punctuation(c))
}

/// Drops tokens that never occur as a whole word in the training reference
/// summaries, and tokens mixing digits or punctuation with other characters.
/// Matching is case-insensitive on the marker-stripped surface. Order is
/// preserved.
pub fn medvoc_llm_clean<T: AsRef<str>, S: AsRef<str>>(
    tokens: &[T],
    marker: &str,
    train_summaries: &[S],
) -> Result<Vec<String>> {
    if train_summaries.is_empty() {
        return Err(Error::EmptyInput("training summaries"));
    }
    let summary_words: HashSet<String> = train_summaries
        .iter()
        .flat_map(|s| normalize_words(s.as_ref()))
        .collect();
    let cleaned: Vec<String> = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|tok| {
            let surface = match tok.strip_prefix(marker) {
                Some(rest) if !marker.is_empty() => rest,
                _ => tok,
            };
            !mixes_digits_or_punctuation(surface)
                && summary_words.contains(&surface.to_lowercase())
        })
        .map(str::to_owned)
        .collect();
    if cleaned.is_empty() {
        return Err(Error::CleanedVocabularyEmpty);
    }
    Ok(cleaned)
}
