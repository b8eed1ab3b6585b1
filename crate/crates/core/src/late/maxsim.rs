//! Token-level MaxSim scoring.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::TokenMatrix;
use crate::index::RankedList;
use crate::late::TokenBag;
use crate::vecmath::dot;
use crate::{Error, Result};

/// Sum over query tokens of the best dot product against any doc token.
pub fn maxsim(query_tokens: &TokenMatrix, doc_tokens: &TokenMatrix) -> Result<f32> {
    if query_tokens.is_empty() {
        return Err(Error::EmptyInput("empty query token matrix".into()));
    }
    if doc_tokens.is_empty() {
        return Err(Error::EmptyInput("empty doc token matrix".into()));
    }
    if query_tokens.dim() != doc_tokens.dim() {
        return Err(Error::DimMismatch {
            expected: query_tokens.dim(),
            got: doc_tokens.dim(),
        });
    }
    let mut total = 0.0f32;
    for q in query_tokens.iter_rows() {
        let best = doc_tokens
            .iter_rows()
            .map(|t| dot(q, t))
            .fold(f32::NEG_INFINITY, f32::max);
        total += best;
    }
    Ok(total)
}

/// How a document's passages combine into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassageAgg {
    #[default]
    Max,
    Sum,
}

impl PassageAgg {
    fn combine(&self, scores: impl Iterator<Item = f32>) -> f32 {
        match self {
            PassageAgg::Max => scores.fold(f32::NEG_INFINITY, f32::max),
            PassageAgg::Sum => scores.sum(),
        }
    }
}

/// Brute-force corpus scoring: every bag against the query.
///
/// Documents score as the aggregate (default max) over their passages.
/// Parallelizes over documents; the output ranking is independent of the
/// parallelism because per-document scores do not interact.
pub fn score_corpus_maxsim(
    query_tokens: &TokenMatrix,
    bags: &[TokenBag],
    agg: PassageAgg,
) -> Result<RankedList> {
    if query_tokens.is_empty() {
        return Err(Error::EmptyInput("empty query token matrix".into()));
    }
    let mut per_doc: std::collections::BTreeMap<&str, Vec<&TokenBag>> =
        std::collections::BTreeMap::new();
    for bag in bags {
        per_doc.entry(bag.doc_id.as_str()).or_default().push(bag);
    }
    let grouped: Vec<(&str, Vec<&TokenBag>)> = per_doc.into_iter().collect();
    let scored: Result<Vec<(String, f32)>> = grouped
        .into_par_iter()
        .map(|(doc_id, doc_bags)| {
            let mut scores = Vec::with_capacity(doc_bags.len());
            for bag in doc_bags {
                scores.push(maxsim(query_tokens, bag.matrix())?);
            }
            Ok((doc_id.to_string(), agg.combine(scores.into_iter())))
        })
        .collect();
    Ok(RankedList::from_unsorted(scored?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f32]]) -> TokenMatrix {
        let dim = rows[0].len();
        let data: Vec<f32> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        TokenMatrix::new(dim, data).unwrap()
    }

    #[test]
    fn worked_example_scores_1_8() {
        let q = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let d = matrix(&[&[1.0, 0.0], &[0.6, 0.8]]);
        // independent double loop
        let mut expected = 0.0f32;
        for qi in q.iter_rows() {
            let mut best = f32::NEG_INFINITY;
            for dj in d.iter_rows() {
                let mut s = 0.0;
                for k in 0..qi.len() {
                    s += qi[k] * dj[k];
                }
                best = best.max(s);
            }
            expected += best;
        }
        assert!((expected - 1.8).abs() < 1e-6);
        assert!((maxsim(&q, &d).unwrap() - 1.8).abs() < 1e-6);
    }

    #[test]
    fn doc_containing_all_query_rows_scores_token_count() {
        let q = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let d = matrix(&[&[0.0, 1.0], &[1.0, 0.0], &[-0.6, 0.8]]);
        assert!((maxsim(&q, &d).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn doc_token_permutation_is_score_invariant() {
        let q = matrix(&[&[0.8, 0.6], &[-0.6, 0.8]]);
        let d1 = matrix(&[&[1.0, 0.0], &[0.0, 1.0], &[0.6, 0.8]]);
        let d2 = matrix(&[&[0.6, 0.8], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(maxsim(&q, &d1).unwrap(), maxsim(&q, &d2).unwrap());
    }

    #[test]
    fn empty_matrices_are_errors() {
        let q = matrix(&[&[1.0, 0.0]]);
        let empty = TokenMatrix::empty(2);
        assert!(maxsim(&empty, &q).is_err());
        assert!(maxsim(&q, &empty).is_err());
    }

    #[test]
    fn adding_doc_tokens_never_lowers_score() {
        let q = matrix(&[&[0.6, 0.8], &[1.0, 0.0]]);
        let base = matrix(&[&[0.0, 1.0]]);
        let extended = matrix(&[&[0.0, 1.0], &[0.9, 0.1]]);
        assert!(maxsim(&q, &extended).unwrap() >= maxsim(&q, &base).unwrap());
    }
}
