//! Adaptive hard-negative mining.
//!
//! The current model ranks the corpus per query; the top-ranked non-relevant
//! documents become that query's negative pool. Pools are refreshed on a
//! fixed batch schedule rather than per step, trading staleness for not
//! re-embedding the corpus continuously.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::index::RankedList;
use crate::types::RelevanceJudgments;
use crate::{Error, Result};

/// Hardest-first negative doc ids per query.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NegativePool {
    pools: BTreeMap<String, Vec<String>>,
    pub refresh_epoch: u64,
}

impl NegativePool {
    pub fn get(&self, query_id: &str) -> Option<&[String]> {
        self.pools.get(query_id).map(Vec::as_slice)
    }

    /// The first `top_n` negatives, the batch-sampling rule.
    pub fn top(&self, query_id: &str, top_n: usize) -> Option<&[String]> {
        self.pools
            .get(query_id)
            .map(|pool| &pool[..top_n.min(pool.len())])
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.pools.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }

    /// JSONL serialization: `{"query_id", "negatives", "refresh_epoch"}`.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            query_id: &'a str,
            negatives: &'a [String],
            refresh_epoch: u64,
        }
        let mut out = String::new();
        for (query_id, negatives) in &self.pools {
            let line = Line {
                query_id,
                negatives,
                refresh_epoch: self.refresh_epoch,
            };
            out.push_str(&serde_json::to_string(&line).expect("pool line serializes"));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Line {
            query_id: String,
            negatives: Vec<String>,
            refresh_epoch: u64,
        }
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pool = NegativePool::default();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(path, idx + 1, e.to_string()))?;
            pool.refresh_epoch = parsed.refresh_epoch;
            pool.pools.insert(parsed.query_id, parsed.negatives);
        }
        Ok(pool)
    }
}

/// Outcome of a mining pass: the pool plus queries whose pools came up short
/// (every candidate was relevant).
#[derive(Debug, Clone, PartialEq)]
pub struct MiningOutcome {
    pub pool: NegativePool,
    pub short_pools: Vec<String>,
}

/// Builds negative pools from a per-query ranking function.
///
/// Per query: rank, drop relevant doc ids, keep the first `pool_size`.
/// `top_n` is the batch draw size and must not exceed `pool_size`. Queries
/// the scorer cannot rank are an error.
pub fn mine_negatives<S>(
    scorer: S,
    judgments: &RelevanceJudgments,
    top_n: usize,
    pool_size: usize,
    refresh_epoch: u64,
) -> Result<MiningOutcome>
where
    S: Fn(&str) -> Option<RankedList>,
{
    if top_n > pool_size {
        return Err(Error::InvalidArgument(format!(
            "top_n {top_n} must be <= pool_size {pool_size}"
        )));
    }
    let mut pool = NegativePool {
        pools: BTreeMap::new(),
        refresh_epoch,
    };
    let mut short_pools = Vec::new();
    for query_id in judgments.query_ids() {
        let ranking = scorer(query_id).ok_or_else(|| {
            Error::Eval(format!("scorer has no ranking for query `{query_id}`"))
        })?;
        let relevant = judgments.relevant_docs(query_id);
        let negatives: Vec<String> = ranking
            .doc_ids()
            .filter(|d| !relevant.contains(d))
            .take(pool_size)
            .map(str::to_string)
            .collect();
        if negatives.len() < pool_size {
            short_pools.push(query_id.to_string());
        }
        pool.pools.insert(query_id.to_string(), negatives);
    }
    Ok(MiningOutcome { pool, short_pools })
}

/// True exactly when `batch_counter` is a multiple of `refresh_every`.
pub fn refresh_schedule(batch_counter: i64, refresh_every: u64) -> Result<bool> {
    if batch_counter < 0 {
        return Err(Error::InvalidArgument(format!(
            "batch counter must be non-negative, got {batch_counter}"
        )));
    }
    if refresh_every == 0 {
        return Err(Error::InvalidArgument("refresh interval must be >= 1".into()));
    }
    Ok((batch_counter as u64) % refresh_every == 0)
}
