//! Field-weight ablation sweeps.
//!
//! Field and chunk embeddings are computed once; each grid point only
//! recomposes vectors and rebuilds a flat in-memory index, so a sweep costs
//! little more than a single evaluation.

use std::collections::BTreeMap;

use crate::compose::{
    build_doc_fields, compose_chunks, CompositionConfig, DocFields, FieldWeights, Similarity,
};
use crate::encode::EncoderPair;
use crate::eval::{evaluate, MetricKind, MetricReport, VectorRetriever};
use crate::index::{build_index, BuildParams};
use crate::types::{AugmentationRecord, DocRecord, QueryRecord, RelevanceJudgments};
use crate::{Error, Result};

/// Everything a sweep needs besides the weight grid.
pub struct SweepInputs<'a> {
    pub dataset: &'a str,
    pub docs: &'a [DocRecord],
    pub augmentations: &'a BTreeMap<String, AugmentationRecord>,
    pub queries: &'a [QueryRecord],
    pub judgments: &'a RelevanceJudgments,
    pub encoders: &'a EncoderPair,
    pub chunk_size: usize,
    pub similarity: Similarity,
    pub normalize_fields: bool,
    pub metric: MetricKind,
    pub ks: &'a [usize],
}

impl SweepInputs<'_> {
    fn composition_config(&self, weights: FieldWeights) -> CompositionConfig {
        CompositionConfig {
            weights,
            chunk_size: self.chunk_size,
            similarity: self.similarity,
            normalize_fields: self.normalize_fields,
        }
    }
}

/// Builds per-document fields once, for reuse across grid points.
pub fn build_all_fields(inputs: &SweepInputs) -> Result<Vec<DocFields>> {
    // weights don't matter for field building; use any valid set
    let cfg = inputs.composition_config(FieldWeights::shared_tower());
    inputs
        .docs
        .iter()
        .map(|doc| {
            build_doc_fields(
                doc,
                inputs.augmentations.get(&doc.doc_id),
                inputs.encoders,
                &cfg,
            )
        })
        .collect()
}

/// Encodes all queries with the query encoder, normalized in cosine mode.
pub fn encode_queries(inputs: &SweepInputs) -> Result<BTreeMap<String, Vec<f32>>> {
    let normalize = inputs
        .composition_config(FieldWeights::shared_tower())
        .normalizes_inputs();
    inputs
        .queries
        .iter()
        .map(|q| {
            let mut v = inputs.encoders.encode_query(&q.text)?;
            if normalize {
                crate::vecmath::normalize_in_place(&mut v);
            }
            Ok((q.query_id.clone(), v))
        })
        .collect()
}

/// One evaluation per grid point, over a shared set of field embeddings.
pub fn ablation_sweep(inputs: &SweepInputs, grid: &[FieldWeights]) -> Result<Vec<MetricReport>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty weight grid".into()));
    }
    let fields = build_all_fields(inputs)?;
    let query_vectors = encode_queries(inputs)?;
    let mut reports = Vec::with_capacity(grid.len());
    for &weights in grid {
        reports.push(evaluate_composed(inputs, &fields, &query_vectors, weights)?);
    }
    Ok(reports)
}

/// Composes, indexes (flat, full scan), and evaluates one weight setting.
pub fn evaluate_composed(
    inputs: &SweepInputs,
    fields: &[DocFields],
    query_vectors: &BTreeMap<String, Vec<f32>>,
    weights: FieldWeights,
) -> Result<MetricReport> {
    let cfg = inputs.composition_config(weights);
    cfg.validate()?;
    let mut composed = Vec::new();
    for f in fields {
        composed.extend(compose_chunks(f, &weights)?);
    }
    let snapshot = serde_json::to_value(&cfg).expect("config serializes");
    let index = build_index(&composed, BuildParams::flat(), snapshot.clone())?;
    let retriever = VectorRetriever {
        index: &index,
        query_vectors,
        k_chunks: Some(usize::MAX),
    };
    evaluate(
        &retriever,
        inputs.queries,
        inputs.judgments,
        inputs.ks,
        inputs.metric,
        inputs.dataset,
        snapshot,
    )
}
