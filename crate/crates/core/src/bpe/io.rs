use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::Tokenizer;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TokenizerFile {
    marker: String,
    vocab: IndexMap<String, u32>,
    merges: Vec<(String, String)>,
    #[serde(default)]
    added: Vec<String>,
}

impl Tokenizer {
    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: TokenizerFile =
            serde_json::from_str(json).map_err(|e| Error::parse("tokenizer file", e))?;
        let n = file.vocab.len();
        let mut tokens: Vec<Option<String>> = vec![None; n];
        for (token, id) in file.vocab {
            let slot = tokens.get_mut(id as usize).ok_or_else(|| {
                Error::InvalidTokenizer(format!(
                    "token {token:?} has id {id} outside [0, {n})"
                ))
            })?;
            if let Some(prev) = slot {
                return Err(Error::InvalidTokenizer(format!(
                    "tokens {prev:?} and {token:?} share id {id}"
                )));
            }
            *slot = Some(token);
        }
        // n slots, n distinct ids in range: every slot is filled.
        let tokens = tokens.into_iter().map(Option::unwrap).collect();
        Tokenizer::from_parts(file.marker, tokens, file.merges, file.added)
    }

    /// Serializes with `vocab` in id order. Output is byte-stable.
    pub fn to_json_string(&self) -> String {
        let file = TokenizerFile {
            marker: self.marker.clone(),
            vocab: self
                .tokens
                .iter()
                .enumerate()
                .map(|(id, t)| (t.clone(), id as u32))
                .collect(),
            merges: self.merges.clone(),
            added: self.added.clone(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("tokenizer serializes");
        out.push('\n');
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Tokenizer::from_json_str(&json)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}
