//! Prompt templates for synthetic query and title generation.
//!
//! The templates are fixed; `{document}` is replaced by the document body,
//! truncated to a configurable number of characters. Rendering is pure, so
//! identical documents always produce identical prompts (and identical
//! prompt hashes for the replay client).

use crate::augment::AugmentConfig;
use crate::types::DocRecord;

const QUERY_TEMPLATE: &str = "\
I will give you an article below. What are some search queries or questions that are relevant for this article or this article can answer?
Separate each query in a new line.
This is the article: {document}
Only provide the user queries without any additional text. Format every query as 'query:' followed by the question. Don't write empty queries.";

const TITLE_TEMPLATE: &str = "\
I will give you an article below. Create a title for the below article.
This is the article: {document}
Only provide the title without any additional text. Format the reply starting with 'title:' followed by the question. Don't write empty title.";

/// Truncates to at most `max_chars` characters (not bytes).
fn truncate_chars(text: &str, max_chars: usize) -> &str {
    match text.char_indices().nth(max_chars) {
        Some((byte_idx, _)) => &text[..byte_idx],
        None => text,
    }
}

pub fn render_query_prompt(doc: &DocRecord, cfg: &AugmentConfig) -> String {
    QUERY_TEMPLATE.replace(
        "{document}",
        truncate_chars(&doc.text, cfg.max_doc_chars_in_prompt),
    )
}

pub fn render_title_prompt(doc: &DocRecord, cfg: &AugmentConfig) -> String {
    TITLE_TEMPLATE.replace(
        "{document}",
        truncate_chars(&doc.text, cfg.max_doc_chars_in_prompt),
    )
}
