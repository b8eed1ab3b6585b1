//! Full evaluation runs over a retriever.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::encode::TokenMatrix;
use crate::eval::{recall_at_k, success_at_k, MetricKind, MetricReport};
use crate::index::{ChunkIndex, RankedList};
use crate::late::{score_corpus_maxsim, PassageAgg, TokenBag};
use crate::types::{QueryRecord, RelevanceJudgments};
use crate::{Error, Result};

/// Anything that can rank documents for a query.
pub trait Retriever: Sync {
    fn rank(&self, query: &QueryRecord, k: usize) -> Result<RankedList>;
}

/// Bi-encoder retriever: precomputed query vectors against a chunk index.
pub struct VectorRetriever<'a> {
    pub index: &'a ChunkIndex,
    pub query_vectors: &'a BTreeMap<String, Vec<f32>>,
    /// Chunk over-fetch; `None` uses the index default.
    pub k_chunks: Option<usize>,
}

impl Retriever for VectorRetriever<'_> {
    fn rank(&self, query: &QueryRecord, k: usize) -> Result<RankedList> {
        let v = self
            .query_vectors
            .get(&query.query_id)
            .ok_or_else(|| Error::UnknownId(query.query_id.clone()))?;
        self.index.search_docs(v, k, self.k_chunks)
    }
}

/// Late-interaction retriever: brute-force MaxSim over token bags.
pub struct MaxSimRetriever<'a> {
    pub bags: &'a [TokenBag],
    pub query_tokens: &'a BTreeMap<String, TokenMatrix>,
    pub agg: PassageAgg,
}

impl Retriever for MaxSimRetriever<'_> {
    fn rank(&self, query: &QueryRecord, k: usize) -> Result<RankedList> {
        let tokens = self
            .query_tokens
            .get(&query.query_id)
            .ok_or_else(|| Error::UnknownId(query.query_id.clone()))?;
        Ok(score_corpus_maxsim(tokens, self.bags, self.agg)?.truncated(k))
    }
}

/// Evaluates mean metric@k over all judged queries.
///
/// Queries missing from the judgments (or judged with an empty relevant set)
/// are skipped and counted, never scored as zero. Queries evaluate in
/// parallel; the reduction runs over a canonically sorted list so results
/// do not depend on thread timing.
pub fn evaluate(
    retriever: &dyn Retriever,
    queries: &[QueryRecord],
    judgments: &RelevanceJudgments,
    ks: &[usize],
    metric: MetricKind,
    dataset: &str,
    config_snapshot: serde_json::Value,
) -> Result<MetricReport> {
    if ks.is_empty() || ks.iter().any(|&k| k == 0) {
        return Err(Error::InvalidArgument("ks must be non-empty, all >= 1".into()));
    }
    let mut judged: Vec<&QueryRecord> = queries
        .iter()
        .filter(|q| !judgments.relevant_docs(&q.query_id).is_empty())
        .collect();
    judged.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    let skipped = queries.len() - judged.len();
    if judged.is_empty() {
        return Err(Error::Eval("no judged queries to evaluate".into()));
    }

    let k_max = *ks.iter().max().expect("non-empty ks");
    let per_query: Result<Vec<(String, BTreeMap<String, f64>)>> = judged
        .par_iter()
        .map(|query| {
            let ranking = retriever.rank(query, k_max)?;
            let relevant = judgments.relevant_docs(&query.query_id);
            let mut row = BTreeMap::new();
            for &k in ks {
                let v = match metric {
                    MetricKind::Recall => recall_at_k(&ranking, &relevant, k),
                    MetricKind::Success => success_at_k(&ranking, &relevant, k),
                };
                row.insert(MetricReport::metric_name(metric, k), v);
            }
            Ok((query.query_id.clone(), row))
        })
        .collect();
    let per_query = per_query?;

    let mut values = BTreeMap::new();
    for &k in ks {
        let name = MetricReport::metric_name(metric, k);
        let sum: f64 = per_query.iter().map(|(_, row)| row[&name]).sum();
        values.insert(name, sum / per_query.len() as f64);
    }

    Ok(MetricReport {
        dataset: dataset.to_string(),
        metric,
        ks: ks.to_vec(),
        values,
        per_query: per_query.into_iter().collect(),
        judged_queries: judged.len(),
        skipped_queries: skipped,
        config_snapshot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct PerfectRetriever<'a> {
        judgments: &'a RelevanceJudgments,
    }

    impl Retriever for PerfectRetriever<'_> {
        fn rank(&self, query: &QueryRecord, k: usize) -> Result<RankedList> {
            let entries: Vec<(String, f32)> = self
                .judgments
                .relevant_docs(&query.query_id)
                .into_iter()
                .enumerate()
                .map(|(i, d)| (d.to_string(), 1.0 - i as f32 * 0.01))
                .collect();
            Ok(RankedList::from_unsorted(entries).truncated(k))
        }
    }

    struct AdversarialRetriever;

    impl Retriever for AdversarialRetriever {
        fn rank(&self, _query: &QueryRecord, k: usize) -> Result<RankedList> {
            let entries: Vec<(String, f32)> = (0..k)
                .map(|i| (format!("junk{i}"), 1.0 - i as f32 * 0.01))
                .collect();
            Ok(RankedList::from_unsorted(entries))
        }
    }

    fn fixture() -> (Vec<QueryRecord>, RelevanceJudgments) {
        let queries: Vec<QueryRecord> = (0..5)
            .map(|i| QueryRecord {
                query_id: format!("q{i}"),
                text: format!("query {i}"),
            })
            .collect();
        let mut judgments = RelevanceJudgments::new();
        for i in 0..5 {
            judgments.insert(format!("q{i}"), format!("d{i}"), 1);
        }
        (queries, judgments)
    }

    #[test]
    fn perfect_retriever_scores_one() {
        let (queries, judgments) = fixture();
        let retriever = PerfectRetriever { judgments: &judgments };
        let report = evaluate(
            &retriever,
            &queries,
            &judgments,
            &[3, 10],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap();
        assert_eq!(report.value(3), Some(1.0));
        assert_eq!(report.value(10), Some(1.0));
        assert_eq!(report.judged_queries, 5);
    }

    #[test]
    fn adversarial_retriever_scores_zero() {
        let (queries, judgments) = fixture();
        let report = evaluate(
            &AdversarialRetriever,
            &queries,
            &judgments,
            &[3],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap();
        assert_eq!(report.value(3), Some(0.0));
    }

    #[test]
    fn unjudged_queries_are_skipped_not_zeroed() {
        let (mut queries, judgments) = fixture();
        queries.push(QueryRecord {
            query_id: "unjudged".into(),
            text: "no judgments".into(),
        });
        let retriever = PerfectRetriever { judgments: &judgments };
        let report = evaluate(
            &retriever,
            &queries,
            &judgments,
            &[3],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap();
        assert_eq!(report.value(3), Some(1.0));
        assert_eq!(report.skipped_queries, 1);
    }

    #[test]
    fn query_order_does_not_matter() {
        let (mut queries, judgments) = fixture();
        let retriever = PerfectRetriever { judgments: &judgments };
        let a = evaluate(
            &retriever,
            &queries,
            &judgments,
            &[3],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap();
        queries.reverse();
        let b = evaluate(
            &retriever,
            &queries,
            &judgments,
            &[3],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.per_query, b.per_query);
    }

    #[test]
    fn zero_judged_queries_is_error() {
        let queries = vec![QueryRecord {
            query_id: "q".into(),
            text: "t".into(),
        }];
        let judgments = RelevanceJudgments::new();
        let err = evaluate(
            &AdversarialRetriever,
            &queries,
            &judgments,
            &[3],
            MetricKind::Recall,
            "fixture",
            serde_json::json!({}),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Eval(_)));
    }
}
