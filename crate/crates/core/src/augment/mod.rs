//! Synthetic query and title generation through a pluggable LLM client.

mod client;
mod parse;
mod prompts;
mod runner;

pub use client::{prompt_hash_hex, HttpLlmClient, LlmClient, ReplayClient, ReplayEntry};
pub use parse::{parse_query_response, parse_title_response};
pub use prompts::{render_query_prompt, render_title_prompt};
pub use runner::{augment_corpus, AugmentOutcome};

use crate::{Error, Result};

/// Knobs for an augmentation run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Cap on synthetic queries kept per document.
    pub max_queries_per_doc: usize,
    /// Generate a title only for documents that have none.
    pub generate_title_if_missing: bool,
    /// Character budget for the document body inside a prompt.
    pub max_doc_chars_in_prompt: usize,
    /// Extra attempts after a failed client call.
    pub retries: u32,
    /// Concurrent in-flight client calls.
    pub concurrency_limit: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            max_queries_per_doc: 10,
            generate_title_if_missing: true,
            max_doc_chars_in_prompt: 8000,
            retries: 2,
            concurrency_limit: 4,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_queries_per_doc == 0 {
            return Err(Error::InvalidConfig("max_queries_per_doc must be positive".into()));
        }
        if self.max_doc_chars_in_prompt == 0 {
            return Err(Error::InvalidConfig("max_doc_chars_in_prompt must be positive".into()));
        }
        if self.concurrency_limit == 0 {
            return Err(Error::InvalidConfig("concurrency_limit must be positive".into()));
        }
        Ok(())
    }
}
