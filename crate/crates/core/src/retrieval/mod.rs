//! Hybrid sparse + dense retrieval over the experience memory.
//!
//! Only record questions are indexed. A query is scored exhaustively against
//! every record (the memory is small), and the two signals are fused as
//!
//! ```text
//! fused = alpha · minmax(bm25) + (1 − alpha) · (cosine + 1) / 2
//! ```
//!
//! where the min-max runs over the whole candidate pool and an all-equal
//! pool normalizes to 0.5. Ties are broken by record id, ascending.

use serde::{Deserialize, Serialize};

mod bm25;
mod embed;
mod index;
mod tokenize;

pub use bm25::SparseIndex;
pub use embed::{cosine_similarity, embed_text, Embedder, Embedding, TrigramEmbedder, DEFAULT_EMBED_DIM};
pub use index::{build_index, retrieve_top_k, DenseModel, Index, INDEX_CACHE_FORMAT_VERSION};
pub use tokenize::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("cannot index an empty memory")]
    EmptyMemory,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("vector dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unknown record '{0}'")]
    UnknownRecord(String),
    #[error("invalid retrieval setting {key}: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("index cache format version {found} is not supported (expected {expected})")]
    UnsupportedCacheVersion { found: u64, expected: u64 },
    #[error("index cache does not match the memory: {0}")]
    StaleCache(String),
    #[error("index cache cannot store an external embedder")]
    CacheUnsupported,
    #[error("index cache: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    pub k: usize,
    pub alpha: f64,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub embed_dim: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k: 5,
            alpha: 0.5,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            embed_dim: DEFAULT_EMBED_DIM,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), RetrievalError> {
        let bad = |key, reason: &str| {
            Err(RetrievalError::InvalidConfig {
                key,
                reason: reason.to_string(),
            })
        };
        if self.k == 0 {
            return bad("retrieval.k", "must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("retrieval.alpha", "must lie in [0, 1]");
        }
        if !(self.bm25_k1.is_finite() && self.bm25_k1 >= 0.0) {
            return bad("retrieval.bm25_k1", "must be a non-negative number");
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return bad("retrieval.bm25_b", "must lie in [0, 1]");
        }
        if self.embed_dim == 0 {
            return bad("retrieval.embed_dim", "must be >= 1");
        }
        Ok(())
    }
}

/// One retrieval hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedCase {
    pub id: String,
    pub sparse_score: f64,
    pub dense_score: f64,
    pub fused_score: f64,
    /// 1-based.
    pub rank: usize,
}
