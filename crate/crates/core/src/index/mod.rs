//! Chunk vector index: exact (flat) and IVF approximate inner-product
//! search, plus max-aggregation from chunk hits to document rankings.
//!
//! Determinism contract: chunk hits order by score descending, then owner
//! doc id ascending, then chunk index ascending; document rankings order by
//! score descending, then doc id ascending. Every search path uses exactly
//! these comparators, so results are reproducible byte for byte.

mod ivf;
mod store;

pub use ivf::IvfParams;
pub use store::{load_index, save_index};

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::ComposedChunkVector;
use crate::vecmath::dot;
use crate::{Error, Result};

/// Owner of one index row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkOwner {
    pub doc_id: String,
    pub chunk_index: usize,
}

/// One chunk-level search hit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkHit {
    pub row: usize,
    pub score: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMode {
    Flat,
    Approximate,
}

/// Build-time parameters, recorded in the index config snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub mode: IndexMode,
    #[serde(default)]
    pub ivf: IvfParams,
}

impl BuildParams {
    pub fn flat() -> Self {
        BuildParams {
            mode: IndexMode::Flat,
            ivf: IvfParams::default(),
        }
    }

    pub fn approximate() -> Self {
        BuildParams {
            mode: IndexMode::Approximate,
            ivf: IvfParams::default(),
        }
    }
}

/// Immutable chunk index. Search is read-only and safe to share.
#[derive(Debug)]
pub struct ChunkIndex {
    dim: usize,
    data: Vec<f32>,
    owners: Vec<ChunkOwner>,
    params: BuildParams,
    ivf: Option<ivf::IvfStructure>,
    /// Arbitrary provenance (composition config etc.), persisted verbatim.
    pub config_snapshot: serde_json::Value,
}

/// Descending-score ranking with unique doc ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    entries: Vec<(String, f32)>,
}

impl RankedList {
    /// Sorts entries by the ranking comparator. Doc ids must be unique.
    pub fn from_unsorted(mut entries: Vec<(String, f32)>) -> Self {
        entries.sort_by(doc_rank_cmp);
        debug_assert!(
            entries.windows(2).all(|w| w[0].0 != w[1].0),
            "duplicate doc ids in ranking"
        );
        RankedList { entries }
    }

    pub fn entries(&self) -> &[(String, f32)] {
        &self.entries
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(d, _)| d.as_str())
    }

    pub fn truncated(mut self, k: usize) -> Self {
        self.entries.truncate(k);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ranking comparator: score desc, then doc id asc.
pub fn doc_rank_cmp(a: &(String, f32), b: &(String, f32)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Keeps the maximum chunk score per document.
///
/// Idempotent and independent of input order; the output respects the
/// ranking comparator.
pub fn aggregate_to_docs<I>(hits: I) -> RankedList
where
    I: IntoIterator<Item = (String, f32)>,
{
    let mut best: std::collections::BTreeMap<String, f32> = std::collections::BTreeMap::new();
    for (doc_id, score) in hits {
        best.entry(doc_id)
            .and_modify(|s| *s = s.max(score))
            .or_insert(score);
    }
    RankedList::from_unsorted(best.into_iter().collect())
}

/// Builds an index over composed chunk vectors.
pub fn build_index(
    composed: &[ComposedChunkVector],
    params: BuildParams,
    config_snapshot: serde_json::Value,
) -> Result<ChunkIndex> {
    if composed.is_empty() {
        return Err(Error::EmptyInput("no vectors to index".into()));
    }
    let dim = composed[0].vector.len();
    if dim == 0 {
        return Err(Error::InvalidMatrix("zero-dim vectors".into()));
    }
    let mut data = Vec::with_capacity(composed.len() * dim);
    let mut owners = Vec::with_capacity(composed.len());
    for c in composed {
        if c.vector.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: c.vector.len(),
            });
        }
        if c.doc_id.contains('\t') || c.doc_id.contains('\n') {
            return Err(Error::InvalidArgument(format!(
                "doc id {:?} contains tab or newline",
                c.doc_id
            )));
        }
        data.extend_from_slice(&c.vector);
        owners.push(ChunkOwner {
            doc_id: c.doc_id.clone(),
            chunk_index: c.chunk_index,
        });
    }
    let ivf = match params.mode {
        IndexMode::Flat => None,
        IndexMode::Approximate => Some(ivf::IvfStructure::train(&data, dim, &params.ivf)),
    };
    Ok(ChunkIndex {
        dim,
        data,
        owners,
        params,
        ivf,
        config_snapshot,
    })
}

impl ChunkIndex {
    pub fn rows(&self) -> usize {
        self.owners.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> IndexMode {
        self.params.mode
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn owner(&self, row: usize) -> &ChunkOwner {
        &self.owners[row]
    }

    pub fn owners(&self) -> &[ChunkOwner] {
        &self.owners
    }

    pub fn vector(&self, row: usize) -> &[f32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub(crate) fn raw_data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn ivf(&self) -> Option<&ivf::IvfStructure> {
        self.ivf.as_ref()
    }

    pub(crate) fn from_parts(
        dim: usize,
        data: Vec<f32>,
        owners: Vec<ChunkOwner>,
        params: BuildParams,
        ivf: Option<ivf::IvfStructure>,
        config_snapshot: serde_json::Value,
    ) -> Self {
        ChunkIndex {
            dim,
            data,
            owners,
            params,
            ivf,
            config_snapshot,
        }
    }

    fn check_query(&self, q: &[f32], k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if q.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        Ok(())
    }

    fn hit_cmp(&self, a: &ChunkHit, b: &ChunkHit) -> Ordering {
        b.score.total_cmp(&a.score).then_with(|| {
            let oa = &self.owners[a.row];
            let ob = &self.owners[b.row];
            oa.doc_id
                .cmp(&ob.doc_id)
                .then_with(|| oa.chunk_index.cmp(&ob.chunk_index))
        })
    }

    fn top_k(&self, mut hits: Vec<ChunkHit>, k: usize) -> Vec<ChunkHit> {
        hits.sort_unstable_by(|a, b| self.hit_cmp(a, b));
        hits.truncate(k);
        hits
    }

    /// Exact scan over every row, regardless of index mode.
    fn scan_all(&self, q: &[f32]) -> Vec<ChunkHit> {
        self.data
            .par_chunks_exact(self.dim)
            .enumerate()
            .map(|(row, v)| ChunkHit {
                row,
                score: dot(q, v),
            })
            .collect()
    }

    /// Top-k chunk hits by dot product.
    ///
    /// Flat mode is exact; approximate mode probes the IVF lists.
    pub fn search_chunks(&self, q: &[f32], k: usize) -> Result<Vec<ChunkHit>> {
        self.check_query(q, k)?;
        let hits = match &self.ivf {
            None => self.scan_all(q),
            Some(ivf) => ivf
                .probe_rows(q)
                .map(|row| ChunkHit {
                    row,
                    score: dot(q, self.vector(row)),
                })
                .collect(),
        };
        Ok(self.top_k(hits, k))
    }

    /// Document ranking from chunk-level search.
    ///
    /// `k_chunks` controls the chunk over-fetch; `None` uses
    /// `max(4 * k_docs, 100)` and flat indexes scan everything.
    pub fn search_docs(&self, q: &[f32], k_docs: usize, k_chunks: Option<usize>) -> Result<RankedList> {
        self.check_query(q, k_docs)?;
        let k_chunks = k_chunks.unwrap_or(match self.params.mode {
            IndexMode::Flat => usize::MAX,
            IndexMode::Approximate => (4 * k_docs).max(100),
        });
        if k_chunks < k_docs {
            return Err(Error::InvalidArgument(format!(
                "k_chunks {k_chunks} must be >= k_docs {k_docs}"
            )));
        }
        let hits = self.search_chunks(q, k_chunks.min(self.rows()).max(1))?;
        let ranked = aggregate_to_docs(
            hits.into_iter()
                .map(|h| (self.owners[h.row].doc_id.clone(), h.score)),
        );
        Ok(ranked.truncated(k_docs))
    }

    /// Mean overlap@k between this index's search and an exact scan.
    ///
    /// Flat indexes trivially return 1.0; for approximate builds this is the
    /// recall self-test recorded next to build parameters.
    pub fn overlap_vs_flat(&self, queries: &[Vec<f32>], k: usize) -> Result<f64> {
        if queries.is_empty() {
            return Err(Error::EmptyInput("no overlap queries".into()));
        }
        let mut total = 0.0f64;
        for q in queries {
            self.check_query(q, k)?;
            let approx = self.search_chunks(q, k)?;
            let exact = self.top_k(self.scan_all(q), k);
            let exact_rows: std::collections::HashSet<usize> =
                exact.iter().map(|h| h.row).collect();
            let inter = approx.iter().filter(|h| exact_rows.contains(&h.row)).count();
            total += inter as f64 / exact.len() as f64;
        }
        Ok(total / queries.len() as f64)
    }
}
