//! Corpus, judgment, sidecar, and embedding-file IO.

mod beir;
mod embfile;
mod lotte;
mod sidecar;

use std::collections::BTreeSet;

pub use beir::{load_beir_corpus, BeirCorpus, BeirDocs};
pub use embfile::{ids_path, read_embeddings, row_number_ids, write_embeddings};
pub use lotte::{load_lotte_corpus, LotteCorpus, LotteDocs, LotteSplit};
pub use sidecar::{read_sidecar, write_sidecar};

use crate::types::RelevanceJudgments;

/// Cross-check of judgments against the doc ids actually present in a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSummary {
    pub corpus_docs: usize,
    pub judged_docs: usize,
    /// Judged doc ids that never appeared in the corpus.
    pub missing_doc_ids: BTreeSet<String>,
}

impl ValidationSummary {
    pub fn is_clean(&self) -> bool {
        self.missing_doc_ids.is_empty()
    }
}

/// Reports every judged doc id that is absent from `corpus_ids`.
pub fn validate_judgments(
    corpus_ids: &BTreeSet<String>,
    judgments: &RelevanceJudgments,
) -> ValidationSummary {
    let judged = judgments.all_doc_ids();
    let missing = judged
        .iter()
        .filter(|id| !corpus_ids.contains(**id))
        .map(|id| id.to_string())
        .collect();
    ValidationSummary {
        corpus_docs: corpus_ids.len(),
        judged_docs: judged.len(),
        missing_doc_ids: missing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_reports_missing_docs() {
        let corpus: BTreeSet<String> = ["d1", "d2"].iter().map(|s| s.to_string()).collect();
        let mut judgments = RelevanceJudgments::new();
        judgments.insert("q1", "d1", 1);
        judgments.insert("q2", "d9", 1);
        let summary = validate_judgments(&corpus, &judgments);
        assert!(!summary.is_clean());
        assert_eq!(
            summary.missing_doc_ids,
            ["d9".to_string()].into_iter().collect()
        );
    }
}
