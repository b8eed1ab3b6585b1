//! Corpus augmentation: one record per document, with per-document
//! degradation on client failure. Only a corpus read error aborts a run.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use crate::augment::client::LlmClient;
use crate::augment::parse::{parse_query_response, parse_title_response};
use crate::augment::prompts::{render_query_prompt, render_title_prompt};
use crate::augment::AugmentConfig;
use crate::hash::Fnv1a64;
use crate::types::{AugmentationRecord, DocRecord};
use crate::{Error, Result};

/// Result of an augmentation run.
#[derive(Debug, Clone)]
pub struct AugmentOutcome {
    /// One record per document, sorted by doc id.
    pub records: Vec<AugmentationRecord>,
    /// Per-document degradation notes, in doc-id order.
    pub warnings: Vec<String>,
    /// Documents where at least one generation failed after retries.
    pub failures: usize,
    /// Query count -> number of documents with that many queries.
    pub query_histogram: BTreeMap<usize, usize>,
}

struct DocResult {
    record: AugmentationRecord,
    warnings: Vec<String>,
    failed: bool,
}

/// Augments every document in the stream.
///
/// Up to `cfg.concurrency_limit` client calls run at once; output is merged
/// in doc-id order so it does not depend on completion timing. A failing
/// client degrades the affected document to an empty record and a warning;
/// a failing corpus stream aborts the whole run.
pub fn augment_corpus<I>(
    docs: I,
    client: &dyn LlmClient,
    cfg: &AugmentConfig,
) -> Result<AugmentOutcome>
where
    I: Iterator<Item = Result<DocRecord>> + Send,
{
    cfg.validate()?;

    let source = Mutex::new(docs);
    let seen = Mutex::new(HashSet::<String>::new());
    let results = Mutex::new(Vec::<DocResult>::new());
    let abort_error = Mutex::new(None::<Error>);
    let aborted = AtomicBool::new(false);

    std::thread::scope(|scope| {
        for _ in 0..cfg.concurrency_limit.max(1) {
            scope.spawn(|| loop {
                if aborted.load(Ordering::Relaxed) {
                    return;
                }
                let next = source.lock().expect("doc source lock").next();
                let doc = match next {
                    None => return,
                    Some(Ok(doc)) => doc,
                    Some(Err(e)) => {
                        aborted.store(true, Ordering::Relaxed);
                        abort_error.lock().expect("abort lock").get_or_insert(e);
                        return;
                    }
                };
                {
                    let mut seen = seen.lock().expect("seen lock");
                    if !seen.insert(doc.doc_id.clone()) {
                        aborted.store(true, Ordering::Relaxed);
                        abort_error
                            .lock()
                            .expect("abort lock")
                            .get_or_insert(Error::DuplicateDocId {
                                doc_id: doc.doc_id.clone(),
                                context: "augmentation input".into(),
                            });
                        return;
                    }
                }
                let result = augment_one(&doc, client, cfg);
                results.lock().expect("results lock").push(result);
            });
        }
    });

    if let Some(e) = abort_error.into_inner().expect("abort lock") {
        return Err(e);
    }

    let mut results = results.into_inner().expect("results lock");
    results.sort_by(|a, b| a.record.doc_id.cmp(&b.record.doc_id));

    let mut histogram = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut failures = 0;
    for r in &results {
        *histogram.entry(r.record.synthetic_queries.len()).or_insert(0) += 1;
        warnings.extend(r.warnings.iter().cloned());
        failures += usize::from(r.failed);
    }

    Ok(AugmentOutcome {
        records: results.into_iter().map(|r| r.record).collect(),
        warnings,
        failures,
        query_histogram: histogram,
    })
}

fn complete_with_retries(
    client: &dyn LlmClient,
    prompt: &str,
    retries: u32,
) -> Result<String> {
    let mut last = None;
    for _ in 0..=retries {
        match client.complete(prompt) {
            Ok(text) => return Ok(text),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn augment_one(doc: &DocRecord, client: &dyn LlmClient, cfg: &AugmentConfig) -> DocResult {
    let mut warnings = Vec::new();
    let mut failed = false;
    let mut hash = Fnv1a64::new();

    let query_prompt = render_query_prompt(doc, cfg);
    hash.update(query_prompt.as_bytes());
    let queries = match complete_with_retries(client, &query_prompt, cfg.retries) {
        Ok(response) => {
            let queries = parse_query_response(&response, cfg.max_queries_per_doc);
            if queries.is_empty() {
                warnings.push(format!(
                    "doc `{}`: response contained no parseable queries",
                    doc.doc_id
                ));
            }
            queries
        }
        Err(e) => {
            failed = true;
            warnings.push(format!("doc `{}`: query generation failed: {e}", doc.doc_id));
            Vec::new()
        }
    };

    // Originals win: a synthetic title is only generated when the document
    // has none.
    let mut synthetic_title = None;
    if doc.title.is_none() && cfg.generate_title_if_missing {
        let title_prompt = render_title_prompt(doc, cfg);
        hash.update(b"\0");
        hash.update(title_prompt.as_bytes());
        match complete_with_retries(client, &title_prompt, cfg.retries) {
            Ok(response) => {
                synthetic_title = parse_title_response(&response);
                if synthetic_title.is_none() {
                    warnings.push(format!(
                        "doc `{}`: response contained no parseable title",
                        doc.doc_id
                    ));
                }
            }
            Err(e) => {
                failed = true;
                warnings.push(format!("doc `{}`: title generation failed: {e}", doc.doc_id));
            }
        }
    }

    DocResult {
        record: AugmentationRecord {
            doc_id: doc.doc_id.clone(),
            synthetic_title,
            synthetic_queries: queries,
            model_tag: client.model_tag().to_string(),
            prompt_hash: format!("{:016x}", hash.finish()),
        },
        warnings,
        failed,
    }
}
