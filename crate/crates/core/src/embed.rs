//! Embedding rows for added tokens.
//!
//! A new token's row is the mean of the rows of the subwords the base
//! tokenizer splits it into. Segmentation always uses the base tokenizer, so
//! the result does not depend on the order tokens were added in.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::bpe::Tokenizer;
use crate::error::{Error, Result};

/// Dense row-major matrix; row `i` belongs to token id `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dims: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, dims: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * dims {
            return Err(Error::Matrix(format!(
                "{rows}x{dims} matrix needs {} values, got {}",
                rows * dims,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Matrix(format!(
                "non-finite value at row {}, column {}",
                i / dims.max(1),
                i % dims.max(1)
            )));
        }
        Ok(EmbeddingMatrix { rows, dims, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dims) {
            return Err(Error::Matrix(format!(
                "row {i} has {} values, expected {dims}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), dims, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `N D` header, then one line per row with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.dims);
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Matrix("missing header line".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Matrix(format!("bad header {header:?}: {e}")))?;
        let [rows, dims] = dims[..] else {
            return Err(Error::Matrix(format!("header must be \"N D\", got {header:?}")));
        };
        let mut values = Vec::with_capacity(rows * dims);
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            if i >= rows {
                return Err(Error::Matrix(format!("header declares {rows} rows, found more")));
            }
            let before = values.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| Error::Matrix(format!("row {i}: bad value {tok:?}: {e}")))?;
                values.push(v);
            }
            if values.len() - before != dims {
                return Err(Error::Matrix(format!(
                    "row {i} has {} values, header declares {dims}",
                    values.len() - before
                )));
            }
            seen += 1;
        }
        if seen != rows {
            return Err(Error::Matrix(format!(
                "header declares {rows} rows, found {seen}"
            )));
        }
        Self::new(rows, dims, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Base-vocabulary ids a token's surface splits into under `base`.
pub fn base_subword_ids(base: &Tokenizer, token: &str) -> Vec<u32> {
    base.segment_surface(token)
        .iter()
        .filter_map(|s| base.id(s))
        .collect()
}

/// Mean of `ids`' rows, clamped per dimension to the rows' range so rounding
/// never leaves their bounding box.
fn mean_row(m: &EmbeddingMatrix, ids: &[u32]) -> Vec<f64> {
    let mut sum = vec![0.0; m.dims];
    let mut lo = vec![f64::INFINITY; m.dims];
    let mut hi = vec![f64::NEG_INFINITY; m.dims];
    for &id in ids {
        for (j, &v) in m.row(id as usize).iter().enumerate() {
            sum[j] += v;
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let n = ids.len() as f64;
    sum.iter()
        .zip(lo.iter().zip(&hi))
        .map(|(s, (l, h))| (s / n).clamp(*l, *h))
        .collect()
}

/// Appends one row per token `extended` adds over `base`, in id order.
/// Existing rows are copied unchanged.
pub fn extend_matrix(m: &EmbeddingMatrix, base: &Tokenizer, extended: &Tokenizer) -> Result<EmbeddingMatrix> {
    if m.rows != base.vocab_size() {
        return Err(Error::Matrix(format!(
            "matrix has {} rows but the base vocabulary has {} tokens",
            m.rows,
            base.vocab_size()
        )));
    }
    if !extended.tokens().starts_with(base.tokens()) {
        return Err(Error::Matrix(
            "extended vocabulary does not keep the base vocabulary as an id prefix".into(),
        ));
    }
    let new_tokens = &extended.tokens()[base.vocab_size()..];
    let new_rows: Vec<Vec<f64>> = new_tokens
        .par_iter()
        .map(|tok| {
            let ids = base_subword_ids(base, tok);
            if ids.is_empty() {
                return Err(Error::Matrix(format!(
                    "token {tok:?} has no subwords in the base vocabulary"
                )));
            }
            Ok(mean_row(m, &ids))
        })
        .collect::<Result<_>>()?;
    let mut values = m.values.clone();
    for r in new_rows {
        values.extend(r);
    }
    EmbeddingMatrix::new(extended.vocab_size(), m.dims, values)
}
