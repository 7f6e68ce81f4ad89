//! Pretokenization shared by every component that needs a notion of "word".
//!
//! Text is split on whitespace, and every character that is neither
//! alphabetic nor numeric is split off as a word of its own. Metric code
//! works on [`normalize_words`], which drops those punctuation pieces and
//! lowercases the rest.

/// Characters that split off into their own pretokenized piece.
pub fn is_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Digits never take part in merges.
pub fn is_digit(c: char) -> bool {
    c.is_ascii_digit()
}

/// Splits `text` into word pieces in surface order. Case is preserved.
pub fn pretokenize(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    for chunk in text.split_whitespace() {
        let mut start = None;
        for (i, c) in chunk.char_indices() {
            if is_punctuation(c) {
                if let Some(s) = start.take() {
                    pieces.push(&chunk[s..i]);
                }
                pieces.push(&chunk[i..i + c.len_utf8()]);
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            pieces.push(&chunk[s..]);
        }
    }
    pieces
}

/// Lowercased words with punctuation pieces removed.
pub fn normalize_words(text: &str) -> Vec<String> {
    pretokenize(text)
        .into_iter()
        .filter(|p| !p.chars().all(is_punctuation))
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_punctuation_off_words() {
        assert_eq!(
            pretokenize("Pain, (reduced)  anti-viral."),
            vec!["Pain", ",", "(", "reduced", ")", "anti", "-", "viral", "."]
        );
    }

    #[test]
    fn digits_stay_inside_words() {
        assert_eq!(pretokenize("covid19 x2"), vec!["covid19", "x2"]);
    }

    #[test]
    fn normalization_lowercases_and_drops_punctuation() {
        assert_eq!(
            normalize_words("The Drug, reduced PAIN."),
            vec!["the", "drug", "reduced", "pain"]
        );
        assert!(normalize_words("  ... ,").is_empty());
    }
}
