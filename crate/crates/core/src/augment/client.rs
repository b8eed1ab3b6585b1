//! The LLM client boundary.
//!
//! Generation is never done in-process: a client either forwards prompts to
//! an HTTP completion service or replays recorded responses from a fixture.
//! Replay fixtures are JSONL lines of `{"prompt_hash", "text"}` keyed by the
//! hex FNV-1a hash of the exact prompt string.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::hash::fnv1a_64;
use crate::{Error, Result};

pub trait LlmClient: Send + Sync {
    /// Identifier recorded in augmentation records (e.g. a model name).
    fn model_tag(&self) -> &str;

    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Hex encoding used for prompt hashes everywhere.
pub fn prompt_hash_hex(prompt: &str) -> String {
    format!("{:016x}", fnv1a_64(prompt.as_bytes()))
}

/// HTTP completion client.
///
/// Wire format: `POST url` with `{"prompt", "max_tokens"}`, response `{"text"}`.
pub struct HttpLlmClient {
    url: String,
    model_tag: String,
    max_tokens: u32,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

impl HttpLlmClient {
    pub fn new(url: impl Into<String>, model_tag: impl Into<String>, max_tokens: u32) -> Self {
        HttpLlmClient {
            url: url.into(),
            model_tag: model_tag.into(),
            max_tokens,
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(120))
                .build(),
        }
    }
}

impl LlmClient for HttpLlmClient {
    fn model_tag(&self) -> &str {
        &self.model_tag
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let body = serde_json::json!({ "prompt": prompt, "max_tokens": self.max_tokens });
        let response = self
            .agent
            .post(&self.url)
            .send_json(body)
            .map_err(|e| Error::LlmClient(format!("POST {}: {e}", self.url)))?;
        let parsed: CompletionResponse = response
            .into_json()
            .map_err(|e| Error::LlmClient(format!("bad response from {}: {e}", self.url)))?;
        Ok(parsed.text)
    }
}

/// One replay fixture line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub prompt_hash: String,
    pub text: String,
}

/// Fixture-backed client: completes by looking the prompt hash up in a map.
pub struct ReplayClient {
    responses: HashMap<String, String>,
    model_tag: String,
}

impl ReplayClient {
    pub fn new(entries: impl IntoIterator<Item = ReplayEntry>, model_tag: impl Into<String>) -> Self {
        ReplayClient {
            responses: entries
                .into_iter()
                .map(|e| (e.prompt_hash, e.text))
                .collect(),
            model_tag: model_tag.into(),
        }
    }

    pub fn from_fixture(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ReplayEntry = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(path, idx + 1, e.to_string()))?;
            entries.push(entry);
        }
        Ok(ReplayClient::new(entries, "replay"))
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl LlmClient for ReplayClient {
    fn model_tag(&self) -> &str {
        &self.model_tag
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let hash = prompt_hash_hex(prompt);
        self.responses
            .get(&hash)
            .cloned()
            .ok_or_else(|| Error::LlmClient(format!("replay fixture has no entry for prompt hash {hash}")))
    }
}
