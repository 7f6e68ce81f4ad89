//! Synthetic inputs shared by the benchmarks.

use medvocab_core::{train_bpe, AddedVocabulary, Tokenizer, WordCounts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYLLABLES: &[&str] = &[
    "an", "ti", "car", "di", "o", "my", "path", "y", "hy", "per", "chol", "es", "ter", "ol", "neu", "ro",
    "gen", "ic", "itis", "osis", "bac", "te", "ri", "al", "mi", "cro", "bi", "log", "ly", "in", "hib",
];

/// Words built from medical-looking syllables.
pub fn words(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=5);
            (0..k).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect()
        })
        .collect()
}

pub fn text(n: usize, seed: u64) -> String {
    words(n, seed).join(" ")
}

pub fn corpus(n: usize, seed: u64) -> WordCounts {
    WordCounts::from_text(&text(n, seed))
}

pub fn tokenizer(budget: usize) -> Tokenizer {
    train_bpe(&corpus(5_000, 1), budget, "▁").expect("synthetic corpus is non-empty")
}

/// Tokenizer extended with `n` whole words for AdaptBPE.
pub fn extended(budget: usize, n: usize) -> Tokenizer {
    let base = tokenizer(budget);
    let added = AddedVocabulary::scaffix(words(n, 2));
    medvocab_core::apply_added_vocab(&base, &added).expect("whole-word tokens are valid")
}
