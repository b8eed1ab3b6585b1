//! Field embedding construction.

use crate::compose::{chunk_document, CompositionConfig};
use crate::encode::EncoderPair;
use crate::types::{AugmentationRecord, DocRecord};
use crate::vecmath;
use crate::{Error, Result};

/// Which sources were absent and replaced by zero vectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FieldFlags {
    pub missing_queries: bool,
    pub missing_title: bool,
    pub empty_body: bool,
}

/// A document's field embeddings plus its raw chunk vectors.
///
/// Missing sources are zero vectors (they add nothing to any dot product),
/// and a document with no body chunks carries a single zero chunk vector so
/// composition still produces one indexable row.
#[derive(Debug, Clone, PartialEq)]
pub struct DocFields {
    pub doc_id: String,
    pub query_field: Vec<f32>,
    pub title_field: Vec<f32>,
    pub chunk_field: Vec<f32>,
    pub chunk_vectors: Vec<Vec<f32>>,
    pub flags: FieldFlags,
}

impl DocFields {
    pub fn dim(&self) -> usize {
        self.query_field.len()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::InvalidMatrix("zero-dim doc fields".into()));
        }
        if self.chunk_vectors.is_empty() {
            return Err(Error::InvalidMatrix(format!(
                "doc `{}` has no chunk vectors (expected at least the zero sentinel)",
                self.doc_id
            )));
        }
        for v in [&self.title_field, &self.chunk_field]
            .into_iter()
            .chain(self.chunk_vectors.iter().map(|c| c))
        {
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

fn encode_failed(doc_id: &str, e: crate::Error) -> Error {
    Error::Encoder {
        id: doc_id.to_string(),
        reason: e.to_string(),
    }
}

/// Builds the field embeddings for one document.
///
/// Title source is the original title when present, otherwise the synthetic
/// one. The query field is the mean of query-encoder embeddings of the
/// synthetic queries; the chunk field is the mean of doc-encoder embeddings
/// of the body chunks. When the config normalizes inputs, every chunk vector
/// and every field vector is unit-normalized after aggregation.
pub fn build_doc_fields(
    doc: &DocRecord,
    augmentation: Option<&AugmentationRecord>,
    encoders: &EncoderPair,
    cfg: &CompositionConfig,
) -> Result<DocFields> {
    cfg.validate()?;
    let dim = encoders.dim();
    let normalize = cfg.normalizes_inputs();
    let mut flags = FieldFlags::default();

    let chunks = chunk_document(&doc.text, cfg.chunk_size);
    let mut chunk_vectors = Vec::with_capacity(chunks.len().max(1));
    for chunk in &chunks {
        let v = encoders
            .encode_doc(chunk)
            .map_err(|e| encode_failed(&doc.doc_id, e))?;
        chunk_vectors.push(v);
    }
    let chunk_field = if chunk_vectors.is_empty() {
        flags.empty_body = true;
        // zero sentinel: the doc still yields one composed row
        chunk_vectors.push(vec![0.0; dim]);
        vec![0.0; dim]
    } else {
        vecmath::mean(&chunk_vectors, dim)
    };

    let synthetic_queries = augmentation
        .map(|a| a.synthetic_queries.as_slice())
        .unwrap_or_default();
    let query_field = if synthetic_queries.is_empty() {
        flags.missing_queries = true;
        vec![0.0; dim]
    } else {
        let mut embeddings = Vec::with_capacity(synthetic_queries.len());
        for q in synthetic_queries {
            embeddings.push(
                encoders
                    .encode_query(q)
                    .map_err(|e| encode_failed(&doc.doc_id, e))?,
            );
        }
        vecmath::mean(&embeddings, dim)
    };

    let title_source = doc
        .title
        .as_deref()
        .or_else(|| augmentation.and_then(|a| a.synthetic_title.as_deref()));
    let title_field = match title_source {
        Some(title) if !title.trim().is_empty() => encoders
            .encode_doc(title)
            .map_err(|e| encode_failed(&doc.doc_id, e))?,
        _ => {
            flags.missing_title = true;
            vec![0.0; dim]
        }
    };

    let mut fields = DocFields {
        doc_id: doc.doc_id.clone(),
        query_field,
        title_field,
        chunk_field,
        chunk_vectors,
        flags,
    };
    if normalize {
        vecmath::normalize_in_place(&mut fields.query_field);
        vecmath::normalize_in_place(&mut fields.title_field);
        vecmath::normalize_in_place(&mut fields.chunk_field);
        for c in &mut fields.chunk_vectors {
            vecmath::normalize_in_place(c);
        }
    }
    Ok(fields)
}
