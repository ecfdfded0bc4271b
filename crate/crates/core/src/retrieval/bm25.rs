//! Okapi BM25 over the indexed questions.
//!
//! ```text
//! score(q, d) = Σ_{t ∈ q} idf(t) · tf(t,d)·(k1 + 1) / (tf(t,d) + k1·(1 − b + b·|d|/avgdl))
//! idf(t)      = max(0, ln(1 + (N − df(t) + 0.5) / (df(t) + 0.5)))
//! ```
//!
//! Query terms are de-duplicated and summed in lexicographic order so that
//! the same query always accumulates in the same order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseIndex {
    k1: f64,
    b: f64,
    term_freqs: Vec<BTreeMap<String, u32>>,
    doc_lens: Vec<u32>,
    doc_freqs: BTreeMap<String, u32>,
    avg_doc_len: f64,
}

impl SparseIndex {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>, k1: f64, b: f64) -> Self {
        let mut term_freqs = Vec::new();
        let mut doc_lens = Vec::new();
        let mut doc_freqs: BTreeMap<String, u32> = BTreeMap::new();
        for doc in docs {
            let tokens = tokenize(doc);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for t in tf.keys() {
                *doc_freqs.entry(t.clone()).or_insert(0) += 1;
            }
            doc_lens.push(tokens.len() as u32);
            term_freqs.push(tf);
        }
        let n = doc_lens.len();
        let avg_doc_len = if n == 0 {
            0.0
        } else {
            doc_lens.iter().map(|&l| l as f64).sum::<f64>() / n as f64
        };
        SparseIndex {
            k1,
            b,
            term_freqs,
            doc_lens,
            doc_freqs,
            avg_doc_len,
        }
    }

    pub fn len(&self) -> usize {
        self.doc_lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_lens.is_empty()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freqs.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0)
    }

    /// Distinct query terms in summation order.
    pub fn query_terms(query_tokens: &[String]) -> Vec<&str> {
        query_tokens
            .iter()
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Score of document `doc` for pre-deduplicated `terms`.
    pub fn score_terms(&self, terms: &[&str], doc: usize) -> f64 {
        let tf_map = &self.term_freqs[doc];
        let len_norm = 1.0 - self.b + self.b * self.doc_lens[doc] as f64 / self.avg_doc_len;
        let mut score = 0.0;
        for term in terms {
            let Some(&tf) = tf_map.get(*term) else {
                continue;
            };
            let tf = tf as f64;
            score += self.idf(term) * tf * (self.k1 + 1.0) / (tf + self.k1 * len_norm);
        }
        score
    }
}
