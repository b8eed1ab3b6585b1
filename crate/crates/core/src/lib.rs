//! Doc-level embedding retrieval engine.
//!
//! Documents are represented by more than their body text: synthetic queries
//! and titles produced by an LLM are treated as additional *fields*, embedded,
//! and folded into each chunk vector so that a single inner-product index
//! captures all of them. The crate covers the full pipeline:
//!
//! - [`corpus`] — BEIR/LoTTE corpus loading, augmentation sidecars, and the
//!   `DVE1` embedding file format.
//! - [`augment`] — prompt rendering, response parsing, and the LLM client
//!   boundary (HTTP or replay-from-fixture).
//! - [`encode`] — the encoder boundary: deterministic mock, file-backed
//!   lookup, and HTTP providers for single-vector and token-level output.
//! - [`compose`] — chunking, field embeddings, and composed chunk vectors
//!   (the weighted-field score and its max-over-composed-chunks form).
//! - [`index`] — flat and IVF inner-product search over composed chunks,
//!   with max-aggregation from chunk hits to document rankings.
//! - [`late`] — token-level MaxSim scoring with the extra title+queries
//!   passage, plus optional 8-bit quantization of stored token matrices.
//! - [`train`] — InfoNCE and margin ranking losses with analytic gradients,
//!   and adaptive hard-negative mining.
//! - [`eval`] — recall@k / success@k, full evaluation runs, and field-weight
//!   ablation sweeps.

pub mod augment;
pub mod compose;
pub mod corpus;
pub mod encode;
pub mod error;
pub mod eval;
pub mod hash;
pub mod index;
pub mod late;
pub mod pipeline;
pub mod selftest;
pub mod train;
pub mod types;
pub mod vecmath;

pub use error::Error;
pub use types::{
    AugmentationRecord, DocRecord, EmbeddingMatrix, QueryRecord, RelevanceJudgments,
};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
