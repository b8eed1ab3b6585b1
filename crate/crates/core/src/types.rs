//! Core domain types shared across the pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A source document: stable id, optional title, raw body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRecord {
    pub doc_id: String,
    pub title: Option<String>,
    pub text: String,
}

/// An evaluation query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub text: String,
}

/// Per-document LLM outputs, persisted in the augmentation sidecar.
///
/// `prompt_hash` is the hex-encoded 64-bit FNV-1a hash over every prompt
/// rendered for the document (query prompt, then `\0` and the title prompt
/// when one was issued).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_title: Option<String>,
    pub synthetic_queries: Vec<String>,
    pub model_tag: String,
    pub prompt_hash: String,
}

impl AugmentationRecord {
    /// Checks the sidecar invariants: queries are non-empty and trimmed.
    pub fn validate(&self) -> Result<()> {
        if self.doc_id.is_empty() {
            return Err(Error::InvalidArgument("empty doc_id".into()));
        }
        for q in &self.synthetic_queries {
            if q.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "doc `{}`: empty synthetic query",
                    self.doc_id
                )));
            }
            if q.trim() != q {
                return Err(Error::InvalidArgument(format!(
                    "doc `{}`: synthetic query with surrounding whitespace: {q:?}",
                    self.doc_id
                )));
            }
        }
        Ok(())
    }
}

/// Relevance judgments: query id -> doc id -> grade.
///
/// Grades are stored as given; anything with grade >= 1 counts as relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceJudgments {
    grades: BTreeMap<String, BTreeMap<String, u32>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>, grade: u32) {
        self.grades
            .entry(query_id.into())
            .or_default()
            .insert(doc_id.into(), grade);
    }

    /// Doc ids judged relevant (grade >= 1) for a query. Empty if unjudged.
    pub fn relevant_docs(&self, query_id: &str) -> BTreeSet<&str> {
        self.grades
            .get(query_id)
            .map(|docs| {
                docs.iter()
                    .filter(|(_, &g)| g >= 1)
                    .map(|(d, _)| d.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_judged(&self, query_id: &str) -> bool {
        self.grades.contains_key(query_id)
    }

    /// Query ids in sorted order.
    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.grades.keys().map(String::as_str)
    }

    /// Number of (query, doc) pairs with grade >= 1.
    pub fn relevant_pair_count(&self) -> usize {
        self.grades
            .values()
            .map(|docs| docs.values().filter(|&&g| g >= 1).count())
            .sum()
    }

    /// Every judged doc id (any grade), for corpus validation.
    pub fn all_doc_ids(&self) -> BTreeSet<&str> {
        self.grades
            .values()
            .flat_map(|docs| docs.keys().map(String::as_str))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }
}

/// Row-aligned dense vectors with an id table.
///
/// Invariants, enforced at construction: `dim >= 1`, `rows * dim == data.len()`,
/// ids unique and non-empty, all components finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    by_id: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, ids: Vec<String>, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dim must be positive".into()));
        }
        if ids.len().checked_mul(dim) != Some(data.len()) {
            return Err(Error::InvalidMatrix(format!(
                "{} ids x dim {} does not match {} values",
                ids.len(),
                dim,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite component {bad}")));
        }
        let mut by_id = HashMap::with_capacity(ids.len());
        for (row, id) in ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::InvalidMatrix(format!("empty id at row {row}")));
            }
            if by_id.insert(id.clone(), row).is_some() {
                return Err(Error::InvalidMatrix(format!("duplicate id `{id}`")));
            }
        }
        Ok(EmbeddingMatrix {
            dim,
            ids,
            data,
            by_id,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    /// Row lookup by id; errors with the missing id.
    pub fn row_by_id(&self, id: &str) -> Result<&[f32]> {
        self.by_id
            .get(id)
            .map(|&row| self.row(row))
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.ids
            .iter()
            .enumerate()
            .map(|(row, id)| (id.as_str(), self.row(row)))
    }
}
