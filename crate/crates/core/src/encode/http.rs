//! HTTP embedding provider.
//!
//! Wire format: `POST url` with body `{"texts": [...], "role": "query"|"doc"}`,
//! response `{"vectors": [[f32, ...], ...]}`. Vector count and dimension are
//! validated against the configuration on every response.

use std::time::Duration;

use serde::Deserialize;

use crate::encode::{Role, TextEncoder};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HttpEncoderConfig {
    pub url: String,
    pub dim: usize,
    /// Texts per request.
    pub batch_size: usize,
    /// Concurrent requests in flight.
    pub max_in_flight: usize,
    pub timeout_secs: u64,
}

impl HttpEncoderConfig {
    pub fn new(url: impl Into<String>, dim: usize) -> Self {
        HttpEncoderConfig {
            url: url.into(),
            dim,
            batch_size: 32,
            max_in_flight: 4,
            timeout_secs: 60,
        }
    }
}

pub struct HttpEncoder {
    cfg: HttpEncoderConfig,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct VectorsResponse {
    vectors: Vec<Vec<f32>>,
}

impl HttpEncoder {
    pub fn new(cfg: HttpEncoderConfig) -> Result<Self> {
        if cfg.dim == 0 || cfg.batch_size == 0 || cfg.max_in_flight == 0 {
            return Err(Error::InvalidConfig(
                "http encoder dim, batch_size, and max_in_flight must be positive".into(),
            ));
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build();
        Ok(HttpEncoder { cfg, agent })
    }

    fn request(&self, texts: &[&str], role: Role) -> Result<Vec<Vec<f32>>> {
        let body = serde_json::json!({ "texts": texts, "role": role.as_str() });
        let response = self
            .agent
            .post(&self.cfg.url)
            .send_json(body)
            .map_err(|e| Error::Http(format!("POST {}: {e}", self.cfg.url)))?;
        let parsed: VectorsResponse = response
            .into_json()
            .map_err(|e| Error::Http(format!("bad response from {}: {e}", self.cfg.url)))?;
        if parsed.vectors.len() != texts.len() {
            return Err(Error::Http(format!(
                "{} vectors for {} texts",
                parsed.vectors.len(),
                texts.len()
            )));
        }
        for v in &parsed.vectors {
            if v.len() != self.cfg.dim {
                return Err(Error::DimMismatch {
                    expected: self.cfg.dim,
                    got: v.len(),
                });
            }
        }
        Ok(parsed.vectors)
    }
}

impl TextEncoder for HttpEncoder {
    fn dim(&self) -> usize {
        self.cfg.dim
    }

    fn encode(&self, text: &str, role: Role) -> Result<Vec<f32>> {
        Ok(self.request(&[text], role)?.pop().expect("one vector"))
    }

    fn encode_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Vec<f32>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let batches: Vec<&[&str]> = texts.chunks(self.cfg.batch_size).collect();
        let mut results: Vec<Option<Result<Vec<Vec<f32>>>>> = Vec::new();
        results.resize_with(batches.len(), || None);

        // Window of at most max_in_flight concurrent requests.
        for window in 0..batches.len().div_ceil(self.cfg.max_in_flight) {
            let start = window * self.cfg.max_in_flight;
            let end = (start + self.cfg.max_in_flight).min(batches.len());
            let mut slot_results = std::thread::scope(|scope| {
                let handles: Vec<_> = batches[start..end]
                    .iter()
                    .map(|batch| scope.spawn(|| self.request(batch, role)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("encoder request thread"))
                    .collect::<Vec<_>>()
            });
            for (offset, r) in slot_results.drain(..).enumerate() {
                results[start + offset] = Some(r);
            }
        }

        let mut out = Vec::with_capacity(texts.len());
        for r in results {
            out.extend(r.expect("all batches processed")?);
        }
        Ok(out)
    }
}
