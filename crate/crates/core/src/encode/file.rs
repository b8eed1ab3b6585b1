//! File-backed embedding provider: lookup of precomputed rows by id.

use crate::types::EmbeddingMatrix;
use crate::Result;

/// Wraps a loaded [`EmbeddingMatrix`]; lookups are by id, never by text.
#[derive(Debug, Clone)]
pub struct FileProvider {
    matrix: EmbeddingMatrix,
}

impl FileProvider {
    pub fn new(matrix: EmbeddingMatrix) -> Self {
        FileProvider { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }

    /// The stored row for `id`; errors name the missing id.
    pub fn lookup(&self, id: &str) -> Result<&[f32]> {
        self.matrix.row_by_id(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.matrix.contains_id(id)
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }
}
