//! Per-query metrics.

use std::collections::BTreeSet;

use crate::index::RankedList;

/// Fraction of the relevant set found in the top k.
///
/// Callers exclude queries with empty relevant sets; this returns 0.0 for
/// them defensively.
pub fn recall_at_k(ranking: &RankedList, relevant: &BTreeSet<&str>, k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let hits = ranking
        .doc_ids()
        .take(k)
        .filter(|d| relevant.contains(d))
        .count();
    hits as f64 / relevant.len() as f64
}

/// 1.0 if any relevant doc appears in the top k, else 0.0.
pub fn success_at_k(ranking: &RankedList, relevant: &BTreeSet<&str>, k: usize) -> f64 {
    let hit = ranking.doc_ids().take(k).any(|d| relevant.contains(d));
    if hit {
        1.0
    } else {
        0.0
    }
}
