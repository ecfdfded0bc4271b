//! Brute-force retrieval scoring written straight from the formulas.
//!
//! Deliberately shares no code with the index: it recomputes document
//! frequencies per query, hashes with its own FNV-1a and keeps everything in
//! plain vectors.

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
pub const DIM: usize = 256;

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn buckets(text: &str) -> Vec<usize> {
    let toks = tokenize(text);
    if toks.is_empty() {
        return vec![];
    }
    let padded: Vec<char> = format!(" {} ", toks.join(" ")).chars().collect();
    (0..padded.len() - 2)
        .map(|i| {
            let tri: String = padded[i..i + 3].iter().collect();
            (fnv1a64(tri.as_bytes()) % DIM as u64) as usize
        })
        .collect()
}

fn fit_idf(corpus: &[&str]) -> Vec<f64> {
    let n = corpus.len() as f64;
    let mut df = vec![0usize; DIM];
    for doc in corpus {
        let mut seen = vec![false; DIM];
        for b in buckets(doc) {
            if !seen[b] {
                seen[b] = true;
                df[b] += 1;
            }
        }
    }
    df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn embed(text: &str, idf: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; DIM];
    for b in buckets(text) {
        v[b] += 1.0;
    }
    for (x, w) in v.iter_mut().zip(idf) {
        *x *= w;
    }
    let n = norm(&v);
    if n > 0.0 {
        for x in &mut v {
            *x /= n;
        }
    }
    v
}

pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

pub fn bm25(query: &str, doc: usize, corpus: &[&str]) -> f64 {
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| tokenize(d)).collect();
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|d| d.len() as f64).sum::<f64>() / n;
    let d = &docs[doc];
    let mut terms = tokenize(query);
    terms.sort();
    terms.dedup();
    let mut score = 0.0;
    for t in &terms {
        let tf = d.iter().filter(|x| *x == t).count() as f64;
        if tf == 0.0 {
            continue;
        }
        let df = docs.iter().filter(|x| x.contains(t)).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0);
        score += idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * d.len() as f64 / avgdl));
    }
    score
}

#[derive(Debug, Clone)]
pub struct Scored {
    pub id: String,
    pub sparse: f64,
    pub dense: f64,
    pub fused: f64,
}

/// Scores every document; `ids[i]` names `corpus[i]`.
pub fn score_all(query: &str, ids: &[String], corpus: &[&str], alpha: f64) -> Vec<Scored> {
    let idf = fit_idf(corpus);
    let q = embed(query, &idf);
    let sparse: Vec<f64> = (0..corpus.len()).map(|i| bm25(query, i, corpus)).collect();
    let dense: Vec<f64> = corpus.iter().map(|d| cosine(&q, &embed(d, &idf))).collect();
    let lo = sparse.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sparse.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..corpus.len())
        .map(|i| {
            let sn = if hi > lo { (sparse[i] - lo) / (hi - lo) } else { 0.5 };
            Scored {
                id: ids[i].clone(),
                sparse: sparse[i],
                dense: dense[i],
                fused: (alpha * sn + (1.0 - alpha) * (dense[i] + 1.0) / 2.0).clamp(0.0, 1.0),
            }
        })
        .collect()
}

/// Ids ordered by `key` descending, ties by id ascending.
pub fn argsort_desc(items: &[Scored], key: impl Fn(&Scored) -> f64) -> Vec<String> {
    let mut v: Vec<&Scored> = items.iter().collect();
    v.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| a.id.cmp(&b.id)));
    v.into_iter().map(|s| s.id.clone()).collect()
}
