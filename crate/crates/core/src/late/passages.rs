//! Passage assembly for token-level scoring.
//!
//! Bodies stay whole unless they exceed the context budget; the title and
//! every synthetic query are concatenated into one extra passage appended
//! after the body passages.

use crate::compose::{chunk_document, token_count};
use crate::types::{AugmentationRecord, DocRecord};

/// Splits a document into scoring passages.
///
/// The body is split only when its whitespace-token count exceeds
/// `max_tokens`. The extra passage is the title (original, else synthetic)
/// followed by all synthetic queries, joined by single spaces, itself split
/// when oversized. Documents with neither title nor queries get no extra
/// passage.
pub fn assemble_passages(
    doc: &DocRecord,
    augmentation: Option<&AugmentationRecord>,
    max_tokens: usize,
) -> Vec<String> {
    assert!(max_tokens >= 1, "max_tokens must be >= 1");
    let mut passages = Vec::new();

    let body_tokens = token_count(&doc.text);
    if body_tokens > max_tokens {
        passages.extend(chunk_document(&doc.text, max_tokens));
    } else if body_tokens > 0 {
        passages.push(doc.text.clone());
    }

    let title = doc
        .title
        .as_deref()
        .or_else(|| augmentation.and_then(|a| a.synthetic_title.as_deref()));
    let queries = augmentation
        .map(|a| a.synthetic_queries.as_slice())
        .unwrap_or_default();

    let mut extra_parts: Vec<&str> = Vec::with_capacity(1 + queries.len());
    if let Some(t) = title {
        if !t.trim().is_empty() {
            extra_parts.push(t);
        }
    }
    extra_parts.extend(queries.iter().map(String::as_str));
    if !extra_parts.is_empty() {
        let extra = extra_parts.join(" ");
        if token_count(&extra) > max_tokens {
            passages.extend(chunk_document(&extra, max_tokens));
        } else {
            passages.push(extra);
        }
    }

    passages
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(title: Option<&str>, text: &str) -> DocRecord {
        DocRecord {
            doc_id: "d".into(),
            title: title.map(str::to_string),
            text: text.into(),
        }
    }

    fn aug(title: Option<&str>, queries: &[&str]) -> AugmentationRecord {
        AugmentationRecord {
            doc_id: "d".into(),
            synthetic_title: title.map(str::to_string),
            synthetic_queries: queries.iter().map(|s| s.to_string()).collect(),
            model_tag: "m".into(),
            prompt_hash: "0".into(),
        }
    }

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn short_body_stays_whole_with_extra_passage() {
        let body = words(100);
        let d = doc(Some("T"), &body);
        let a = aug(None, &["a", "b"]);
        let passages = assemble_passages(&d, Some(&a), 256);
        assert_eq!(passages, vec![body, "T a b".to_string()]);
    }

    #[test]
    fn long_body_splits_at_budget() {
        let d = doc(Some("T"), &words(300));
        let a = aug(None, &["a"]);
        let passages = assemble_passages(&d, Some(&a), 256);
        assert_eq!(passages.len(), 3);
        assert_eq!(token_count(&passages[0]), 256);
        assert_eq!(token_count(&passages[1]), 44);
        assert_eq!(passages[2], "T a");
    }

    #[test]
    fn no_title_no_queries_is_body_only() {
        let body = words(10);
        let d = doc(None, &body);
        assert_eq!(assemble_passages(&d, None, 256), vec![body]);
    }

    #[test]
    fn synthetic_title_used_when_original_missing() {
        let d = doc(None, "body text");
        let a = aug(Some("Synth"), &["q1"]);
        let passages = assemble_passages(&d, Some(&a), 256);
        assert_eq!(passages[1], "Synth q1");
    }

    #[test]
    fn oversized_extra_passage_is_split() {
        let d = doc(None, "body");
        let queries: Vec<String> = (0..50).map(|i| format!("q{i}")).collect();
        let refs: Vec<&str> = queries.iter().map(String::as_str).collect();
        let a = aug(Some("T"), &refs);
        let passages = assemble_passages(&d, Some(&a), 16);
        // body + ceil(51 / 16) = 4 extra chunks
        assert_eq!(passages.len(), 1 + 4);
    }

    #[test]
    fn empty_body_with_fields_still_gets_extra_passage() {
        let d = doc(None, "");
        let a = aug(Some("Only Title"), &[]);
        let passages = assemble_passages(&d, Some(&a), 64);
        assert_eq!(passages, vec!["Only Title".to_string()]);
    }
}
