//! Deterministic mock encoder.
//!
//! The algorithm is specified exactly so that fixtures pinned on one machine
//! reproduce everywhere:
//!
//! 1. lowercase the text and split on whitespace;
//! 2. per token, take the 64-bit FNV-1a hash of its UTF-8 bytes XOR a role
//!    constant (0 in shared mode);
//! 3. expand the hash through a splitmix64 stream into `dim` values mapped
//!    linearly onto `[-1, 1)` (f64), and unit-normalize;
//! 4. the text vector is the mean of the token vectors, unit-normalized;
//! 5. empty text encodes to the zero vector.
//!
//! All intermediate arithmetic runs in f64 and is cast to f32 at the end.

use crate::encode::{Role, TextEncoder, TokenEncoder, TokenMatrix, TowerMode};
use crate::hash::{fnv1a_64, splitmix64, to_unit_interval};
use crate::{Error, Result};

/// Arbitrary fixed constants distinguishing the two towers.
const ROLE_QUERY: u64 = 0xa076_1d64_78bd_642f;
const ROLE_DOC: u64 = 0xe703_7ed1_a0b4_28db;

#[derive(Debug, Clone)]
pub struct MockEncoder {
    dim: usize,
    mode: TowerMode,
}

impl MockEncoder {
    pub fn new(dim: usize, mode: TowerMode) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "mock encoder needs dim >= 2, got {dim}"
            )));
        }
        Ok(MockEncoder { dim, mode })
    }

    fn role_constant(&self, role: Role) -> u64 {
        match self.mode {
            TowerMode::Shared => 0,
            TowerMode::TwoTower => match role {
                Role::Query => ROLE_QUERY,
                Role::Doc => ROLE_DOC,
            },
        }
    }

    fn token_vector_f64(&self, token: &str, role_constant: u64) -> Vec<f64> {
        let mut state = fnv1a_64(token.as_bytes()) ^ role_constant;
        let mut v: Vec<f64> = (0..self.dim)
            .map(|_| to_unit_interval(splitmix64(&mut state)))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }

    fn tokens(text: &str) -> Vec<String> {
        text.to_lowercase()
            .split_whitespace()
            .map(str::to_string)
            .collect()
    }

    fn encode_f64(&self, text: &str, role_constant: u64) -> Vec<f64> {
        let tokens = Self::tokens(text);
        if tokens.is_empty() {
            return vec![0.0; self.dim];
        }
        let mut acc = vec![0.0f64; self.dim];
        for token in &tokens {
            let tv = self.token_vector_f64(token, role_constant);
            for (a, x) in acc.iter_mut().zip(tv.iter()) {
                *a += x;
            }
        }
        let n = tokens.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for a in &mut acc {
                *a /= norm;
            }
        }
        acc
    }
}

impl TextEncoder for MockEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str, role: Role) -> Result<Vec<f32>> {
        let v = self.encode_f64(text, self.role_constant(role));
        Ok(v.into_iter().map(|x| x as f32).collect())
    }
}

impl TokenEncoder for MockEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Token rows use the shared-role constant 0: token-level scoring has a
    /// single encoder for both sides.
    fn encode_tokens(&self, text: &str) -> Result<TokenMatrix> {
        let tokens = Self::tokens(text);
        let mut data = Vec::with_capacity(tokens.len() * self.dim);
        for token in &tokens {
            let tv = self.token_vector_f64(token, 0);
            data.extend(tv.into_iter().map(|x| x as f32));
        }
        TokenMatrix::new(self.dim, data)
    }
}
