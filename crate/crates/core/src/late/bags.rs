//! Token bags: per-passage token matrices, persistence, and optional 8-bit
//! quantization.

use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{read_embeddings, row_number_ids, write_embeddings};
use crate::encode::TokenMatrix;
use crate::types::EmbeddingMatrix;
use crate::vecmath::l2_norm;
use crate::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-6;

/// Token matrix of one passage, tagged with its owner.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenBag {
    pub doc_id: String,
    pub passage_index: usize,
    matrix: TokenMatrix,
}

impl TokenBag {
    /// Validates the bag invariants: at least one row, rows unit-norm
    /// within 1e-6.
    pub fn new(doc_id: impl Into<String>, passage_index: usize, matrix: TokenMatrix) -> Result<Self> {
        let doc_id = doc_id.into();
        if matrix.is_empty() {
            return Err(Error::EmptyInput(format!(
                "token bag for doc `{doc_id}` passage {passage_index} has no rows"
            )));
        }
        for (i, row) in matrix.iter_rows().enumerate() {
            let norm = l2_norm(row);
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "doc `{doc_id}` passage {passage_index} row {i}: norm {norm} is not unit"
                )));
            }
        }
        Ok(TokenBag {
            doc_id,
            passage_index,
            matrix,
        })
    }

    pub fn matrix(&self) -> &TokenMatrix {
        &self.matrix
    }

    pub fn tokens(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn owners_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".owners.tsv");
    PathBuf::from(s)
}

/// Persists bags as one `DVE1` shard plus a row owners table
/// (`row<TAB>doc_id<TAB>passage_index`). Bags are sorted by
/// (doc id, passage index) so writes are canonical.
pub fn save_bags(path: &Path, bags: &[TokenBag]) -> Result<()> {
    if bags.is_empty() {
        return Err(Error::EmptyInput("no token bags to save".into()));
    }
    let dim = bags[0].dim();
    let mut sorted: Vec<&TokenBag> = bags.iter().collect();
    sorted.sort_by(|a, b| {
        a.doc_id
            .cmp(&b.doc_id)
            .then_with(|| a.passage_index.cmp(&b.passage_index))
    });

    let mut data = Vec::new();
    let mut owners = String::new();
    let mut row = 0usize;
    let mut seen = std::collections::HashSet::new();
    for bag in &sorted {
        if bag.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: bag.dim(),
            });
        }
        if !seen.insert((bag.doc_id.clone(), bag.passage_index)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate bag for doc `{}` passage {}",
                bag.doc_id, bag.passage_index
            )));
        }
        if bag.doc_id.contains('\t') || bag.doc_id.contains('\n') {
            return Err(Error::InvalidArgument(format!(
                "doc id {:?} contains tab or newline",
                bag.doc_id
            )));
        }
        data.extend_from_slice(bag.matrix.data());
        for _ in 0..bag.tokens() {
            owners.push_str(&format!("{row}\t{}\t{}\n", bag.doc_id, bag.passage_index));
            row += 1;
        }
    }

    let matrix = EmbeddingMatrix::new(dim, row_number_ids(row), data)?;
    write_embeddings(path, &matrix)?;
    let op = owners_path(path);
    fs::write(&op, owners).map_err(|e| Error::io(&op, e))
}

/// Loads a bag shard written by [`save_bags`].
pub fn load_bags(path: &Path) -> Result<Vec<TokenBag>> {
    let matrix = read_embeddings(path)?;
    let op = owners_path(path);
    let owners_text = fs::read_to_string(&op).map_err(|e| Error::io(&op, e))?;

    let mut bags = Vec::new();
    let mut current: Option<(String, usize, Vec<f32>)> = None;
    let mut seen = std::collections::HashSet::new();
    let mut rows = 0usize;
    for (idx, line) in owners_text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::malformed(&op, idx + 1, "expected 3 columns"));
        }
        let row: usize = cols[0]
            .parse()
            .map_err(|_| Error::malformed(&op, idx + 1, "bad row"))?;
        if row != idx {
            return Err(Error::malformed(&op, idx + 1, "rows out of order"));
        }
        let passage_index: usize = cols[2]
            .parse()
            .map_err(|_| Error::malformed(&op, idx + 1, "bad passage index"))?;
        let owner = (cols[1].to_string(), passage_index);
        rows += 1;

        let matches_current = current
            .as_ref()
            .map(|(d, p, _)| d == &owner.0 && *p == owner.1)
            .unwrap_or(false);
        if !matches_current {
            if let Some((doc_id, passage, data)) = current.take() {
                bags.push(TokenBag::new(doc_id, passage, TokenMatrix::new(matrix.dim(), data)?)?);
            }
            if !seen.insert(owner.clone()) {
                return Err(Error::malformed(
                    &op,
                    idx + 1,
                    format!("bag ({}, {}) split across the shard", owner.0, owner.1),
                ));
            }
            current = Some((owner.0, owner.1, Vec::new()));
        }
        current
            .as_mut()
            .expect("current bag")
            .2
            .extend_from_slice(matrix.row(idx));
    }
    if let Some((doc_id, passage, data)) = current.take() {
        bags.push(TokenBag::new(doc_id, passage, TokenMatrix::new(matrix.dim(), data)?)?);
    }
    if rows != matrix.rows() {
        return Err(Error::bad_format(
            &op,
            format!("{rows} owner rows for {} matrix rows", matrix.rows()),
        ));
    }
    Ok(bags)
}

/// 8-bit scalar quantization of a token bag.
///
/// Symmetric per-bag scheme: `scale = max_abs / 127`, codes are
/// `round(v / scale)` clamped to `[-127, 127]`. Each component is off by at
/// most `scale / 2`, so a dot product against a query row `q` is off by at
/// most `(scale / 2) * ||q||_1`. Taking a max over perturbed dots and
/// summing over query rows keeps the same bound per row, which is what
/// [`QuantizedBag::score_error_bound`] reports for a whole MaxSim score.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedBag {
    pub doc_id: String,
    pub passage_index: usize,
    dim: usize,
    scale: f32,
    codes: Vec<i8>,
}

impl QuantizedBag {
    pub fn quantize(bag: &TokenBag) -> Self {
        let data = bag.matrix.data();
        let max_abs = data.iter().fold(0.0f32, |m, &v| m.max(v.abs()));
        let scale = if max_abs == 0.0 { 1.0 } else { max_abs / 127.0 };
        let codes = data
            .iter()
            .map(|&v| (v / scale).round().clamp(-127.0, 127.0) as i8)
            .collect();
        QuantizedBag {
            doc_id: bag.doc_id.clone(),
            passage_index: bag.passage_index,
            dim: bag.dim(),
            scale,
            codes,
        }
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn rows(&self) -> usize {
        self.codes.len() / self.dim
    }

    /// Bytes used by the codes (the memory-parity number).
    pub fn code_bytes(&self) -> usize {
        self.codes.len()
    }

    fn row(&self, i: usize) -> &[i8] {
        &self.codes[i * self.dim..(i + 1) * self.dim]
    }

    /// MaxSim against the quantized rows.
    pub fn maxsim(&self, query_tokens: &TokenMatrix) -> Result<f32> {
        if query_tokens.is_empty() {
            return Err(Error::EmptyInput("empty query token matrix".into()));
        }
        if query_tokens.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: query_tokens.dim(),
            });
        }
        let mut total = 0.0f32;
        for q in query_tokens.iter_rows() {
            let mut best = f32::NEG_INFINITY;
            for r in 0..self.rows() {
                let row = self.row(r);
                let mut acc = 0.0f32;
                for d in 0..self.dim {
                    acc += q[d] * f32::from(row[d]);
                }
                best = best.max(acc * self.scale);
            }
            total += best;
        }
        Ok(total)
    }

    /// Upper bound on `|maxsim(q, original) - maxsim(q, quantized)|`.
    pub fn score_error_bound(&self, query_tokens: &TokenMatrix) -> f32 {
        let half_step = self.scale * 0.5;
        query_tokens
            .iter_rows()
            .map(|q| half_step * q.iter().map(|x| x.abs()).sum::<f32>())
            .sum()
    }
}
