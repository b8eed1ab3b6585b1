//! Index persistence.
//!
//! Directory layout:
//!
//! ```text
//! vectors.dve1 (+ .ids)        composed chunk vectors, row-number ids
//! owners.tsv                   row<TAB>doc_id<TAB>chunk_index
//! config.json                  build params, resolved IVF shape, snapshot
//! ivf_centroids.dve1 (+ .ids)  approximate mode only
//! ivf_lists.tsv                row<TAB>list, approximate mode only
//! ```
//!
//! Saving a loaded index reproduces every file byte for byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_embeddings, row_number_ids, write_embeddings};
use crate::index::ivf::IvfStructure;
use crate::index::{BuildParams, ChunkIndex, ChunkOwner, IndexMode};
use crate::types::EmbeddingMatrix;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct IndexConfigFile {
    params: BuildParams,
    rows: usize,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ivf_resolved: Option<IvfResolved>,
    snapshot: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IvfResolved {
    nlist: usize,
    nprobe: usize,
    /// Total posting entries; spill assignment makes this exceed the row count.
    postings: usize,
}

pub fn save_index(dir: &Path, index: &ChunkIndex) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let vectors = EmbeddingMatrix::new(
        index.dim(),
        row_number_ids(index.rows()),
        index.raw_data().to_vec(),
    )?;
    write_embeddings(&dir.join("vectors.dve1"), &vectors)?;

    let mut owners = String::new();
    for (row, owner) in index.owners().iter().enumerate() {
        owners.push_str(&format!("{row}\t{}\t{}\n", owner.doc_id, owner.chunk_index));
    }
    let owners_path = dir.join("owners.tsv");
    fs::write(&owners_path, owners).map_err(|e| Error::io(owners_path, e))?;

    let mut ivf_resolved = None;
    if let Some(ivf) = index.ivf() {
        ivf_resolved = Some(IvfResolved {
            nlist: ivf.nlist(),
            nprobe: ivf.nprobe,
            postings: ivf.lists.iter().map(Vec::len).sum(),
        });
        let centroids = EmbeddingMatrix::new(
            index.dim(),
            row_number_ids(ivf.nlist()),
            ivf.centroids.clone(),
        )?;
        write_embeddings(&dir.join("ivf_centroids.dve1"), &centroids)?;
        let mut lists = String::new();
        for (list, rows) in ivf.lists.iter().enumerate() {
            for row in rows {
                lists.push_str(&format!("{row}\t{list}\n"));
            }
        }
        let lists_path = dir.join("ivf_lists.tsv");
        fs::write(&lists_path, lists).map_err(|e| Error::io(lists_path, e))?;
    }

    let config = IndexConfigFile {
        params: index.params().clone(),
        rows: index.rows(),
        dim: index.dim(),
        ivf_resolved,
        snapshot: index.config_snapshot.clone(),
    };
    let config_path = dir.join("config.json");
    let mut body = serde_json::to_string_pretty(&config).expect("config serializes");
    body.push('\n');
    fs::write(&config_path, body).map_err(|e| Error::io(config_path, e))
}

pub fn load_index(dir: &Path) -> Result<ChunkIndex> {
    let config_path = dir.join("config.json");
    let config_text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    let config: IndexConfigFile = serde_json::from_str(&config_text)
        .map_err(|e| Error::bad_format(&config_path, e.to_string()))?;

    let vectors = read_embeddings(&dir.join("vectors.dve1"))?;
    if vectors.dim() != config.dim || vectors.rows() != config.rows {
        return Err(Error::bad_format(
            dir.join("vectors.dve1"),
            format!(
                "vectors are {}x{}, config says {}x{}",
                vectors.rows(),
                vectors.dim(),
                config.rows,
                config.dim
            ),
        ));
    }

    let owners_path = dir.join("owners.tsv");
    let owners_text = fs::read_to_string(&owners_path).map_err(|e| Error::io(&owners_path, e))?;
    let mut owners = Vec::with_capacity(config.rows);
    for (idx, line) in owners_text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::malformed(&owners_path, idx + 1, "expected 3 columns"));
        }
        let row: usize = cols[0]
            .parse()
            .map_err(|_| Error::malformed(&owners_path, idx + 1, "bad row number"))?;
        if row != idx {
            return Err(Error::malformed(
                &owners_path,
                idx + 1,
                format!("row {row} out of order"),
            ));
        }
        let chunk_index: usize = cols[2]
            .parse()
            .map_err(|_| Error::malformed(&owners_path, idx + 1, "bad chunk index"))?;
        owners.push(ChunkOwner {
            doc_id: cols[1].to_string(),
            chunk_index,
        });
    }
    if owners.len() != config.rows {
        return Err(Error::bad_format(
            &owners_path,
            format!("{} owners for {} rows", owners.len(), config.rows),
        ));
    }

    let ivf = match (config.params.mode, &config.ivf_resolved) {
        (IndexMode::Flat, _) => None,
        (IndexMode::Approximate, None) => {
            return Err(Error::bad_format(
                &config_path,
                "approximate index missing ivf_resolved",
            ))
        }
        (IndexMode::Approximate, Some(resolved)) => {
            let centroids = read_embeddings(&dir.join("ivf_centroids.dve1"))?;
            if centroids.dim() != config.dim || centroids.rows() != resolved.nlist {
                return Err(Error::bad_format(
                    dir.join("ivf_centroids.dve1"),
                    "centroid shape disagrees with config",
                ));
            }
            let lists_path = dir.join("ivf_lists.tsv");
            let lists_text =
                fs::read_to_string(&lists_path).map_err(|e| Error::io(&lists_path, e))?;
            let mut lists = vec![Vec::new(); resolved.nlist];
            let mut assigned = 0usize;
            for (idx, line) in lists_text.lines().enumerate() {
                let Some((row, list)) = line.split_once('\t') else {
                    return Err(Error::malformed(&lists_path, idx + 1, "expected 2 columns"));
                };
                let row: u32 = row
                    .parse()
                    .map_err(|_| Error::malformed(&lists_path, idx + 1, "bad row"))?;
                let list: usize = list
                    .parse()
                    .map_err(|_| Error::malformed(&lists_path, idx + 1, "bad list"))?;
                if list >= resolved.nlist {
                    return Err(Error::malformed(&lists_path, idx + 1, "list out of range"));
                }
                lists[list].push(row);
                assigned += 1;
            }
            if assigned != resolved.postings {
                return Err(Error::bad_format(
                    &lists_path,
                    format!(
                        "{assigned} posting entries, config says {}",
                        resolved.postings
                    ),
                ));
            }
            Some(IvfStructure {
                dim: config.dim,
                nprobe: resolved.nprobe,
                centroids: centroids.data().to_vec(),
                lists,
            })
        }
    };

    Ok(ChunkIndex::from_parts(
        config.dim,
        vectors.data().to_vec(),
        owners,
        config.params,
        ivf,
        config.snapshot,
    ))
}
