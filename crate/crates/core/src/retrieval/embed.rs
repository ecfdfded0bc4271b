//! Dense vectors for the semantic half of hybrid retrieval.
//!
//! The built-in embedder hashes character trigrams of the normalized token
//! stream into a fixed number of buckets (FNV-1a), weights bucket counts by a
//! smoothed IDF fitted on the memory, and L2-normalizes. Any other embedding
//! source can be plugged in through [`Embedder`].

use std::collections::BTreeSet;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::RetrievalError;

pub const DEFAULT_EMBED_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub values: Vec<f64>,
    /// Set when the text produced no features; `values` is then all zeros.
    pub empty: bool,
}

impl Embedding {
    pub fn zeros(dim: usize) -> Self {
        Embedding {
            values: vec![0.0; dim],
            empty: true,
        }
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }
}

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Embedding;
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `u·v / (|u| |v|)`, or 0 when either vector is zero. Clamped to [-1, 1].
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, RetrievalError> {
    if u.len() != v.len() {
        return Err(RetrievalError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (nu, nv) = (l2_norm(u), l2_norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigramEmbedder {
    dim: usize,
    idf: Vec<f64>,
}

impl TrigramEmbedder {
    /// Unweighted embedder (every bucket has IDF 1).
    pub fn new(dim: usize) -> Self {
        let dim = dim.max(1);
        TrigramEmbedder { dim, idf: vec![1.0; dim] }
    }

    /// Fits bucket IDF on a corpus: `ln((1 + N) / (1 + df)) + 1`.
    pub fn fit<'a>(dim: usize, corpus: impl IntoIterator<Item = &'a str>) -> Self {
        let mut embedder = Self::new(dim);
        let mut df = vec![0u32; embedder.dim];
        let mut n = 0u32;
        for doc in corpus {
            n += 1;
            let present: BTreeSet<usize> = embedder.buckets(doc).into_iter().collect();
            for b in present {
                df[b] += 1;
            }
        }
        for (w, d) in embedder.idf.iter_mut().zip(&df) {
            *w = ((1.0 + n as f64) / (1.0 + *d as f64)).ln() + 1.0;
        }
        embedder
    }

    fn buckets(&self, text: &str) -> Vec<usize> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Vec::new();
        }
        let padded: Vec<char> = format!(" {} ", tokens.join(" ")).chars().collect();
        let mut buf = String::with_capacity(12);
        padded
            .windows(3)
            .map(|w| {
                buf.clear();
                buf.extend(w);
                let mut h = FnvHasher::default();
                h.write(buf.as_bytes());
                (h.finish() % self.dim as u64) as usize
            })
            .collect()
    }
}

impl Embedder for TrigramEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Embedding {
        let buckets = self.buckets(text);
        if buckets.is_empty() {
            return Embedding::zeros(self.dim);
        }
        let mut values = vec![0.0; self.dim];
        for b in buckets {
            values[b] += 1.0;
        }
        for (v, w) in values.iter_mut().zip(&self.idf) {
            *v *= w;
        }
        let norm = l2_norm(&values);
        for v in &mut values {
            *v /= norm;
        }
        Embedding { values, empty: false }
    }
}

/// Embeds with the default unweighted trigram embedder (`D = 256`).
pub fn embed_text(text: &str) -> Embedding {
    TrigramEmbedder::new(DEFAULT_EMBED_DIM).embed(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = embed_text("What is the capital of France?");
        let b = embed_text("What is the capital of France?");
        assert_eq!(a, b);
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn unit_norm() {
        let e = embed_text("photosynthesis");
        assert!((e.norm() - 1.0).abs() < 1e-9);
        assert!(!e.empty);
        assert_eq!(e.values.len(), DEFAULT_EMBED_DIM);
    }

    #[test]
    fn empty_text_is_flagged_zero_vector() {
        for text in ["", "  ", "?!"] {
            let e = embed_text(text);
            assert!(e.empty);
            assert!(e.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn cosine_basics() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(RetrievalError::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn cosine_matches_hand_oracle() {
        // 32 / sqrt(14 * 77), evaluated independently.
        let got = cosine_similarity(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((got - 0.9746318461970762).abs() < 1e-12);
    }

    #[test]
    fn fitted_idf_downweights_common_buckets() {
        let corpus = ["the cat", "the dog", "the bird"];
        let e = TrigramEmbedder::fit(64, corpus);
        assert!(e.idf.iter().all(|w| *w >= 1.0));
        assert!(e.idf.iter().any(|w| *w > 1.0));
    }
}
