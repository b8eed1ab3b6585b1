//! Stage plumbing: the file layouts that connect `augment`, `embed`,
//! `index`, and `eval` runs.
//!
//! Stages communicate only through documented formats (sidecar JSONL, `DVE1`
//! matrices, index directories), so any stage can be re-run independently or
//! fed with externally produced embeddings.
//!
//! Dense embed directory:
//!
//! ```text
//! chunks.dve1 (+ .ids, + .owners.tsv)   per-chunk doc-encoder vectors
//! field_query.dve1 (+ .ids)            per-doc query-field vectors, doc ids
//! field_title.dve1 (+ .ids)            per-doc title vectors
//! field_chunk.dve1 (+ .ids)            per-doc chunk-mean vectors
//! queries.dve1 (+ .ids)                eval query vectors, query ids
//! meta.json
//! ```
//!
//! Token embed directory: `bags.dve1`, `qtokens.dve1` (both with owners
//! tables) and `meta.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::{
    build_doc_fields, compose_chunks, CompositionConfig, DocFields, FieldFlags,
};
use crate::corpus::{read_embeddings, row_number_ids, write_embeddings};
use crate::encode::{EncoderPair, TokenEncoder, TokenMatrix};
use crate::index::{build_index, BuildParams, ChunkIndex};
use crate::late::{assemble_passages, save_bags, TokenBag};
use crate::types::{AugmentationRecord, DocRecord, EmbeddingMatrix, QueryRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedMeta {
    pub dim: usize,
    pub docs: usize,
    pub chunk_rows: usize,
    pub queries: usize,
    pub composition: CompositionConfig,
}

fn owners_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".owners.tsv");
    PathBuf::from(s)
}

/// Encodes fields and queries for the bi-encoder path and writes the embed
/// directory. Returns per-doc flags for the run summary.
pub fn embed_dense(
    docs: &[DocRecord],
    augmentations: &BTreeMap<String, AugmentationRecord>,
    queries: &[QueryRecord],
    encoders: &EncoderPair,
    cfg: &CompositionConfig,
    dir: &Path,
) -> Result<Vec<(String, FieldFlags)>> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let fields: Result<Vec<DocFields>> = docs
        .par_iter()
        .map(|doc| build_doc_fields(doc, augmentations.get(&doc.doc_id), encoders, cfg))
        .collect();
    let fields = fields?;
    let dim = encoders.dim();

    let doc_ids: Vec<String> = fields.iter().map(|f| f.doc_id.clone()).collect();
    let field_matrix = |pick: fn(&DocFields) -> &Vec<f32>| -> Result<EmbeddingMatrix> {
        let mut data = Vec::with_capacity(doc_ids.len() * dim);
        for f in &fields {
            data.extend_from_slice(pick(f));
        }
        EmbeddingMatrix::new(dim, doc_ids.clone(), data)
    };
    write_embeddings(&dir.join("field_query.dve1"), &field_matrix(|f| &f.query_field)?)?;
    write_embeddings(&dir.join("field_title.dve1"), &field_matrix(|f| &f.title_field)?)?;
    write_embeddings(&dir.join("field_chunk.dve1"), &field_matrix(|f| &f.chunk_field)?)?;

    let mut chunk_data = Vec::new();
    let mut owners = String::new();
    let mut row = 0usize;
    for f in &fields {
        for (chunk_index, c) in f.chunk_vectors.iter().enumerate() {
            chunk_data.extend_from_slice(c);
            owners.push_str(&format!("{row}\t{}\t{chunk_index}\n", f.doc_id));
            row += 1;
        }
    }
    let chunks_path = dir.join("chunks.dve1");
    write_embeddings(
        &chunks_path,
        &EmbeddingMatrix::new(dim, row_number_ids(row), chunk_data)?,
    )?;
    let op = owners_path(&chunks_path);
    fs::write(&op, owners).map_err(|e| Error::io(&op, e))?;

    let normalize = cfg.normalizes_inputs();
    let mut qdata = Vec::with_capacity(queries.len() * dim);
    let mut qids = Vec::with_capacity(queries.len());
    for q in queries {
        let mut v = encoders.encode_query(&q.text)?;
        if normalize {
            crate::vecmath::normalize_in_place(&mut v);
        }
        qdata.extend_from_slice(&v);
        qids.push(q.query_id.clone());
    }
    write_embeddings(&dir.join("queries.dve1"), &EmbeddingMatrix::new(dim, qids, qdata)?)?;

    write_meta(
        dir,
        &EmbedMeta {
            dim,
            docs: fields.len(),
            chunk_rows: row,
            queries: queries.len(),
            composition: cfg.clone(),
        },
    )?;

    Ok(fields.into_iter().map(|f| (f.doc_id, f.flags)).collect())
}

fn write_meta(dir: &Path, meta: &EmbedMeta) -> Result<()> {
    let path = dir.join("meta.json");
    let mut body = serde_json::to_string_pretty(meta).expect("meta serializes");
    body.push('\n');
    fs::write(&path, body).map_err(|e| Error::io(&path, e))
}

pub fn read_meta(dir: &Path) -> Result<EmbedMeta> {
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::bad_format(&path, e.to_string()))
}

fn is_zero(v: &[f32]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

/// Rebuilds [`DocFields`] from an embed directory.
pub fn load_fields(dir: &Path) -> Result<Vec<DocFields>> {
    let query_m = read_embeddings(&dir.join("field_query.dve1"))?;
    let title_m = read_embeddings(&dir.join("field_title.dve1"))?;
    let chunk_m = read_embeddings(&dir.join("field_chunk.dve1"))?;
    let chunks = read_embeddings(&dir.join("chunks.dve1"))?;

    let chunks_path = dir.join("chunks.dve1");
    let op = owners_path(&chunks_path);
    let owners_text = fs::read_to_string(&op).map_err(|e| Error::io(&op, e))?;
    let mut per_doc_chunks: BTreeMap<String, Vec<(usize, Vec<f32>)>> = BTreeMap::new();
    for (idx, line) in owners_text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::malformed(&op, idx + 1, "expected 3 columns"));
        }
        let row: usize = cols[0]
            .parse()
            .map_err(|_| Error::malformed(&op, idx + 1, "bad row"))?;
        let chunk_index: usize = cols[2]
            .parse()
            .map_err(|_| Error::malformed(&op, idx + 1, "bad chunk index"))?;
        per_doc_chunks
            .entry(cols[1].to_string())
            .or_default()
            .push((chunk_index, chunks.row(row).to_vec()));
    }

    let mut fields = Vec::with_capacity(query_m.rows());
    for (row, doc_id) in query_m.ids().iter().enumerate() {
        let mut doc_chunks = per_doc_chunks.remove(doc_id).ok_or_else(|| {
            Error::bad_format(&op, format!("doc `{doc_id}` has no chunk rows"))
        })?;
        doc_chunks.sort_by_key(|(i, _)| *i);
        let chunk_vectors: Vec<Vec<f32>> = doc_chunks.into_iter().map(|(_, v)| v).collect();
        let query_field = query_m.row(row).to_vec();
        let title_field = title_m.row_by_id(doc_id)?.to_vec();
        let chunk_field = chunk_m.row_by_id(doc_id)?.to_vec();
        let flags = FieldFlags {
            missing_queries: is_zero(&query_field),
            missing_title: is_zero(&title_field),
            empty_body: chunk_vectors.len() == 1 && is_zero(&chunk_vectors[0]),
        };
        fields.push(DocFields {
            doc_id: doc_id.clone(),
            query_field,
            title_field,
            chunk_field,
            chunk_vectors,
            flags,
        });
    }
    if !per_doc_chunks.is_empty() {
        return Err(Error::bad_format(
            &op,
            format!("{} chunk owners without field rows", per_doc_chunks.len()),
        ));
    }
    Ok(fields)
}

/// Query vectors from an embed directory, keyed by query id.
pub fn load_query_vectors(dir: &Path) -> Result<BTreeMap<String, Vec<f32>>> {
    let m = read_embeddings(&dir.join("queries.dve1"))?;
    Ok(m.iter().map(|(id, v)| (id.to_string(), v.to_vec())).collect())
}

/// Composes every doc's chunks and builds the chunk index.
pub fn compose_and_build(
    fields: &[DocFields],
    cfg: &CompositionConfig,
    params: BuildParams,
) -> Result<ChunkIndex> {
    cfg.validate()?;
    let mut composed = Vec::new();
    for f in fields {
        composed.extend(compose_chunks(f, &cfg.weights)?);
    }
    let snapshot = serde_json::json!({
        "composition": cfg,
        "build": params,
    });
    build_index(&composed, params, snapshot)
}

/// Token-level embed stage: passage bags for docs, token matrices for
/// queries.
pub fn embed_token(
    docs: &[DocRecord],
    augmentations: &BTreeMap<String, AugmentationRecord>,
    queries: &[QueryRecord],
    encoder: &dyn TokenEncoder,
    max_passage_tokens: usize,
    dir: &Path,
) -> Result<(usize, usize)> {
    if max_passage_tokens == 0 {
        return Err(Error::InvalidConfig("max_passage_tokens must be >= 1".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let bags: Result<Vec<Vec<TokenBag>>> = docs
        .par_iter()
        .map(|doc| {
            let passages =
                assemble_passages(doc, augmentations.get(&doc.doc_id), max_passage_tokens);
            let mut out = Vec::with_capacity(passages.len());
            for (i, p) in passages.iter().enumerate() {
                let matrix = encoder.encode_tokens(p)?;
                if matrix.is_empty() {
                    continue;
                }
                out.push(TokenBag::new(doc.doc_id.clone(), i, matrix)?);
            }
            Ok(out)
        })
        .collect();
    let bags: Vec<TokenBag> = bags?.into_iter().flatten().collect();
    if bags.is_empty() {
        return Err(Error::EmptyInput("no token bags produced".into()));
    }
    save_bags(&dir.join("bags.dve1"), &bags)?;

    let mut qbags = Vec::with_capacity(queries.len());
    for q in queries {
        let matrix = encoder.encode_tokens(&q.text)?;
        if matrix.is_empty() {
            return Err(Error::Encoder {
                id: q.query_id.clone(),
                reason: "query text produced no tokens".into(),
            });
        }
        qbags.push(TokenBag::new(q.query_id.clone(), 0, matrix)?);
    }
    save_bags(&dir.join("qtokens.dve1"), &qbags)?;

    write_meta(
        dir,
        &EmbedMeta {
            dim: encoder.dim(),
            docs: docs.len(),
            chunk_rows: bags.len(),
            queries: queries.len(),
            composition: CompositionConfig {
                chunk_size: max_passage_tokens,
                ..CompositionConfig::default()
            },
        },
    )?;
    Ok((bags.len(), qbags.len()))
}

/// Query token matrices from a token embed directory.
pub fn load_query_tokens(dir: &Path) -> Result<BTreeMap<String, TokenMatrix>> {
    let bags = crate::late::load_bags(&dir.join("qtokens.dve1"))?;
    Ok(bags
        .into_iter()
        .map(|b| (b.doc_id.clone(), b.matrix().clone()))
        .collect())
}
