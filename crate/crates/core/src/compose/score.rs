//! Field-sum scoring and its composed-chunk equivalent.
//!
//! The two routes must agree under dot similarity: the best-chunk score plus
//! weighted field scores equals the maximum dot product over chunk vectors
//! with the weighted field sum folded in. That identity is what lets one
//! inner-product index serve the whole composed score, and it is the central
//! invariant of this module.

use serde::{Deserialize, Serialize};

use crate::compose::{DocFields, FieldWeights, Similarity};
use crate::vecmath::dot;
use crate::{Error, Result};

/// One indexable row: a chunk vector with the weighted field sum added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedChunkVector {
    pub doc_id: String,
    pub chunk_index: usize,
    pub vector: Vec<f32>,
}

fn check_dims(q: &[f32], fields: &DocFields) -> Result<()> {
    fields.validate()?;
    if q.len() != fields.dim() {
        return Err(Error::DimMismatch {
            expected: fields.dim(),
            got: q.len(),
        });
    }
    Ok(())
}

/// Best-chunk similarity plus weighted field similarities.
///
/// With no chunk vectors the max term is 0, matching the zero-sentinel
/// convention.
pub fn score_doc_eq2(
    q: &[f32],
    fields: &DocFields,
    weights: &FieldWeights,
    similarity: Similarity,
) -> Result<f32> {
    check_dims(q, fields)?;
    weights.validate()?;
    let best_chunk = fields
        .chunk_vectors
        .iter()
        .map(|c| similarity.score(q, c))
        .fold(f32::NEG_INFINITY, f32::max);
    let best_chunk = if best_chunk == f32::NEG_INFINITY {
        0.0
    } else {
        best_chunk
    };
    Ok(best_chunk
        + weights.query * similarity.score(q, &fields.query_field)
        + weights.title * similarity.score(q, &fields.title_field)
        + weights.chunk * similarity.score(q, &fields.chunk_field))
}

/// The weighted field sum added to every chunk.
pub fn field_sum(fields: &DocFields, weights: &FieldWeights) -> Vec<f32> {
    let dim = fields.dim();
    let mut sum = vec![0.0f32; dim];
    for d in 0..dim {
        sum[d] = weights.query * fields.query_field[d]
            + weights.title * fields.title_field[d]
            + weights.chunk * fields.chunk_field[d];
    }
    sum
}

/// Folds the weighted field sum into each chunk vector.
///
/// For every query vector, the max dot product over the returned vectors
/// equals [`score_doc_eq2`] under dot similarity.
pub fn compose_chunks(fields: &DocFields, weights: &FieldWeights) -> Result<Vec<ComposedChunkVector>> {
    fields.validate()?;
    weights.validate()?;
    let sum = field_sum(fields, weights);
    Ok(fields
        .chunk_vectors
        .iter()
        .enumerate()
        .map(|(chunk_index, chunk)| {
            let vector = chunk.iter().zip(sum.iter()).map(|(c, s)| c + s).collect();
            ComposedChunkVector {
                doc_id: fields.doc_id.clone(),
                chunk_index,
                vector,
            }
        })
        .collect())
}

/// Max dot product over composed vectors: the indexed-score route.
pub fn max_composed_dot(q: &[f32], composed: &[ComposedChunkVector]) -> f32 {
    composed
        .iter()
        .map(|c| dot(q, &c.vector))
        .fold(f32::NEG_INFINITY, f32::max)
}
