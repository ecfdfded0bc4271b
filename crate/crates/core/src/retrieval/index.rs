use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bm25::SparseIndex;
use super::embed::{cosine_similarity, Embedder, Embedding, TrigramEmbedder};
use super::tokenize::tokenize;
use super::{RetrievalConfig, RetrievalError, RetrievedCase};
use crate::exec::Execution;
use crate::memory::Memory;

pub const INDEX_CACHE_FORMAT_VERSION: u64 = 1;

/// Source of dense vectors for an index.
#[derive(Clone)]
pub enum DenseModel {
    Trigram(TrigramEmbedder),
    External(Arc<dyn Embedder>),
}

impl DenseModel {
    fn embedder(&self) -> &dyn Embedder {
        match self {
            DenseModel::Trigram(e) => e,
            DenseModel::External(e) => e.as_ref(),
        }
    }
}

impl std::fmt::Debug for DenseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DenseModel::Trigram(e) => f.debug_tuple("Trigram").field(&e.dim()).finish(),
            DenseModel::External(e) => f.debug_tuple("External").field(&e.dim()).finish(),
        }
    }
}

/// Immutable retrieval structures derived from a memory.
#[derive(Debug, Clone)]
pub struct Index {
    config: RetrievalConfig,
    ids: Vec<String>,
    positions: HashMap<String, usize>,
    sparse: SparseIndex,
    vectors: Vec<Embedding>,
    dense: DenseModel,
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.ids == other.ids && self.sparse == other.sparse && self.vectors == other.vectors
    }
}

/// Builds the default index: BM25 plus IDF-weighted hashed trigrams fitted on
/// the memory's questions.
pub fn build_index(memory: &Memory, config: &RetrievalConfig) -> Result<Index, RetrievalError> {
    let embedder = TrigramEmbedder::fit(config.embed_dim, memory.records().iter().map(|r| r.question.as_str()));
    Index::build_with(memory, config, DenseModel::Trigram(embedder), Execution::Sequential)
}

/// Top-`k` records for `query` under the index's fusion weight.
pub fn retrieve_top_k(index: &Index, query: &str, k: usize) -> Result<Vec<RetrievedCase>, RetrievalError> {
    index.retrieve(query, k, index.config.alpha, Execution::default())
}

impl Index {
    pub fn build_with(memory: &Memory, config: &RetrievalConfig, dense: DenseModel, exec: Execution) -> Result<Index, RetrievalError> {
        config.validate()?;
        if memory.is_empty() {
            return Err(RetrievalError::EmptyMemory);
        }
        let questions: Vec<&str> = memory.records().iter().map(|r| r.question.as_str()).collect();
        let sparse = SparseIndex::build(questions.iter().copied(), config.bm25_k1, config.bm25_b);
        let embedder = dense.embedder();
        let vectors = exec.map(&questions, |q| embedder.embed(q));
        let ids: Vec<String> = memory.records().iter().map(|r| r.id.clone()).collect();
        Ok(Index {
            config: config.clone(),
            positions: ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect(),
            ids,
            sparse,
            vectors,
            dense,
        })
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Embedding] {
        &self.vectors
    }

    pub fn sparse(&self) -> &SparseIndex {
        &self.sparse
    }

    pub fn embed(&self, text: &str) -> Embedding {
        self.dense.embedder().embed(text)
    }

    pub fn bm25_score(&self, query_tokens: &[String], record_id: &str) -> Result<f64, RetrievalError> {
        let pos = *self
            .positions
            .get(record_id)
            .ok_or_else(|| RetrievalError::UnknownRecord(record_id.to_string()))?;
        Ok(self.sparse.score_terms(&SparseIndex::query_terms(query_tokens), pos))
    }

    /// Raw (bm25, cosine) for every record, in index order.
    pub fn score_all(&self, query: &str, exec: Execution) -> Vec<(f64, f64)> {
        let tokens = tokenize(query);
        let terms = SparseIndex::query_terms(&tokens);
        let q = self.embed(query);
        let positions: Vec<usize> = (0..self.ids.len()).collect();
        exec.map(&positions, |&i| {
            let sparse = self.sparse.score_terms(&terms, i);
            // Dimensions agree by construction; a mismatching external
            // embedder contributes no dense signal.
            let dense = cosine_similarity(&q.values, &self.vectors[i].values).unwrap_or(0.0);
            (sparse, dense)
        })
    }

    pub fn retrieve(&self, query: &str, k: usize, alpha: f64, exec: Execution) -> Result<Vec<RetrievedCase>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::InvalidK);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(RetrievalError::InvalidConfig {
                key: "retrieval.alpha",
                reason: format!("{alpha} is outside [0, 1]"),
            });
        }
        let raw = self.score_all(query, exec);
        let (lo, hi) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (s, _)| (lo.min(*s), hi.max(*s)));
        let mut cases: Vec<RetrievedCase> = raw
            .iter()
            .zip(&self.ids)
            .map(|(&(sparse, dense), id)| {
                let sparse_norm = if hi > lo { (sparse - lo) / (hi - lo) } else { 0.5 };
                let fused = alpha * sparse_norm + (1.0 - alpha) * (dense + 1.0) / 2.0;
                RetrievedCase {
                    id: id.clone(),
                    sparse_score: sparse,
                    dense_score: dense,
                    fused_score: fused.clamp(0.0, 1.0),
                    rank: 0,
                }
            })
            .collect();
        cases.sort_by(|a, b| b.fused_score.total_cmp(&a.fused_score).then_with(|| a.id.cmp(&b.id)));
        cases.truncate(k);
        for (i, case) in cases.iter_mut().enumerate() {
            case.rank = i + 1;
        }
        Ok(cases)
    }

    pub fn save_cache(&self, path: impl AsRef<Path>) -> Result<(), RetrievalError> {
        let DenseModel::Trigram(embedder) = &self.dense else {
            return Err(RetrievalError::CacheUnsupported);
        };
        let cache = IndexCacheRef {
            format_version: INDEX_CACHE_FORMAT_VERSION,
            config: &self.config,
            ids: &self.ids,
            sparse: &self.sparse,
            vectors: &self.vectors,
            embedder,
        };
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, &cache).map_err(|e| RetrievalError::CacheFormat(e.to_string()))?;
        out.flush()?;
        Ok(())
    }

    /// Loads a cache written by [`Index::save_cache`] and checks that it
    /// was built from `memory` (same ids, same order).
    pub fn load_cache(path: impl AsRef<Path>, memory: &Memory) -> Result<Index, RetrievalError> {
        let reader = BufReader::new(File::open(path)?);
        let value: serde_json::Value = serde_json::from_reader(reader).map_err(|e| RetrievalError::CacheFormat(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| RetrievalError::CacheFormat("missing format_version".into()))?;
        if found != INDEX_CACHE_FORMAT_VERSION {
            return Err(RetrievalError::UnsupportedCacheVersion {
                found,
                expected: INDEX_CACHE_FORMAT_VERSION,
            });
        }
        let cache: IndexCache = serde_json::from_value(value).map_err(|e| RetrievalError::CacheFormat(e.to_string()))?;
        let memory_ids: Vec<&str> = memory.records().iter().map(|r| r.id.as_str()).collect();
        if cache.ids.iter().map(String::as_str).ne(memory_ids.iter().copied()) {
            return Err(RetrievalError::StaleCache("record ids differ".into()));
        }
        if cache.vectors.len() != cache.ids.len() || cache.sparse.len() != cache.ids.len() {
            return Err(RetrievalError::CacheFormat("inconsistent entry counts".into()));
        }
        cache.config.validate()?;
        Ok(Index {
            positions: cache.ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect(),
            config: cache.config,
            ids: cache.ids,
            sparse: cache.sparse,
            vectors: cache.vectors,
            dense: DenseModel::Trigram(cache.embedder),
        })
    }
}

#[derive(Serialize)]
struct IndexCacheRef<'a> {
    format_version: u64,
    config: &'a RetrievalConfig,
    ids: &'a [String],
    sparse: &'a SparseIndex,
    vectors: &'a [Embedding],
    embedder: &'a TrigramEmbedder,
}

#[derive(Deserialize)]
struct IndexCache {
    config: RetrievalConfig,
    ids: Vec<String>,
    sparse: SparseIndex,
    vectors: Vec<Embedding>,
    embedder: TrigramEmbedder,
}
