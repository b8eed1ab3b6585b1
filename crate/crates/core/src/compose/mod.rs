//! Document chunking, field embeddings, and composed chunk vectors.
//!
//! A document contributes three *fields* beyond its raw chunks: the mean of
//! its synthetic-query embeddings, a title embedding, and the mean of its
//! chunk embeddings. Scoring adds the weighted field similarities to the
//! best chunk similarity; because the similarity is linear, the same score
//! is the maximum dot product against per-chunk vectors with the weighted
//! field sum folded in. That folded form is what gets indexed.

mod chunker;
mod fields;
mod score;

pub use chunker::{chunk_document, token_count};
pub use fields::{build_doc_fields, DocFields, FieldFlags};
pub use score::{compose_chunks, field_sum, max_composed_dot, score_doc_eq2, ComposedChunkVector};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-field weights in the composed score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldWeights {
    pub query: f32,
    pub title: f32,
    pub chunk: f32,
}

impl FieldWeights {
    pub const fn new(query: f32, title: f32, chunk: f32) -> Self {
        FieldWeights { query, title, chunk }
    }

    /// Defaults tuned for shared-tower encoders.
    pub const fn shared_tower() -> Self {
        FieldWeights::new(1.0, 0.5, 0.1)
    }

    /// Defaults tuned for two-tower encoders.
    pub const fn two_tower() -> Self {
        FieldWeights::new(0.6, 0.3, 0.3)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("query", self.query), ("title", self.title), ("chunk", self.chunk)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "field weight `{name}` must be finite and non-negative, got {w}"
                )));
            }
        }
        Ok(())
    }

    /// The standard ablation grid: each field alone, then the combined row.
    pub fn ablation_grid(combined: FieldWeights) -> Vec<FieldWeights> {
        vec![
            FieldWeights::new(0.0, 0.0, 1.0),
            FieldWeights::new(1.0, 0.0, 0.0),
            FieldWeights::new(0.0, 1.0, 0.0),
            combined,
        ]
    }
}

/// Similarity used for scoring.
///
/// Cosine is implemented as normalize-then-dot; composed vectors are *not*
/// re-normalized after summation, which would break the equivalence between
/// the field-sum score and the max over composed chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    Dot,
    Cosine,
}

impl Similarity {
    pub fn score(&self, a: &[f32], b: &[f32]) -> f32 {
        match self {
            Similarity::Dot => crate::vecmath::dot(a, b),
            Similarity::Cosine => {
                let na = crate::vecmath::l2_norm(a);
                let nb = crate::vecmath::l2_norm(b);
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    (f64::from(crate::vecmath::dot(a, b)) / (na * nb)) as f32
                }
            }
        }
    }
}

/// Composition settings, serialized alongside every index for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub weights: FieldWeights,
    pub chunk_size: usize,
    pub similarity: Similarity,
    /// Normalize field vectors before weighting even in dot mode.
    pub normalize_fields: bool,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        CompositionConfig {
            weights: FieldWeights::shared_tower(),
            chunk_size: 64,
            similarity: Similarity::Dot,
            normalize_fields: false,
        }
    }
}

impl CompositionConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk_size must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether inputs get unit-normalized during field building.
    pub fn normalizes_inputs(&self) -> bool {
        self.normalize_fields || self.similarity == Similarity::Cosine
    }
}
