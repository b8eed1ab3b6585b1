//! The encoder boundary.
//!
//! Everything downstream of this module works on vectors and never on model
//! internals. Three providers implement the boundary: a deterministic mock
//! (tests, fixtures), a file-backed lookup over precomputed matrices, and an
//! HTTP client for sidecar inference services.

mod file;
mod http;
mod mock;

use std::sync::Arc;

pub use file::FileProvider;
pub use http::{HttpEncoder, HttpEncoderConfig};
pub use mock::MockEncoder;

use crate::{Error, Result};

/// Which tower a text is encoded for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Query,
    Doc,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Query => "query",
            Role::Doc => "doc",
        }
    }
}

/// Shared tower (one model for both roles) vs two separate towers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerMode {
    Shared,
    TwoTower,
}

/// Single-vector text encoder.
pub trait TextEncoder: Send + Sync {
    fn dim(&self) -> usize;

    fn encode(&self, text: &str, role: Role) -> Result<Vec<f32>>;

    fn encode_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Vec<f32>>> {
        texts.iter().map(|t| self.encode(t, role)).collect()
    }
}

/// Token-level encoder: one unit-norm row per token.
pub trait TokenEncoder: Send + Sync {
    fn dim(&self) -> usize;

    /// Row-major token matrix; empty text yields an empty matrix.
    fn encode_tokens(&self, text: &str) -> Result<TokenMatrix>;
}

/// A dense row-major matrix of token vectors (no id table).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    dim: usize,
    data: Vec<f32>,
}

impl TokenMatrix {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("token matrix dim must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidMatrix(format!(
                "{} values is not a multiple of dim {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite token component".into()));
        }
        Ok(TokenMatrix { dim, data })
    }

    pub fn empty(dim: usize) -> Self {
        TokenMatrix { dim, data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Query and doc encoders considered as one unit.
///
/// `shared == true` means both sides are the same function, in which case
/// query and doc encodings of any text are identical.
#[derive(Clone)]
pub struct EncoderPair {
    query: Arc<dyn TextEncoder>,
    doc: Arc<dyn TextEncoder>,
    shared: bool,
}

impl EncoderPair {
    pub fn shared(encoder: Arc<dyn TextEncoder>) -> Self {
        EncoderPair {
            query: encoder.clone(),
            doc: encoder,
            shared: true,
        }
    }

    pub fn two_tower(query: Arc<dyn TextEncoder>, doc: Arc<dyn TextEncoder>) -> Result<Self> {
        if query.dim() != doc.dim() {
            return Err(Error::DimMismatch {
                expected: query.dim(),
                got: doc.dim(),
            });
        }
        Ok(EncoderPair {
            query,
            doc,
            shared: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.query.dim()
    }

    pub fn is_shared(&self) -> bool {
        self.shared
    }

    pub fn encode_query(&self, text: &str) -> Result<Vec<f32>> {
        self.query.encode(text, Role::Query)
    }

    pub fn encode_doc(&self, text: &str) -> Result<Vec<f32>> {
        self.doc.encode(text, Role::Doc)
    }
}
