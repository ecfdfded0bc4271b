"""Brute-force oracle used to freeze expected values in the Rust tests.

Independent of the Rust implementation: textbook formulas, written out
directly. Run with `python3 freeze_values.py`.
"""
import math
import re

K1, B, DIM, ALPHA = 1.2, 0.75, 256, 0.5


def tokenize(text):
    return [t.lower() for t in re.split(r"[^0-9A-Za-zÀ-￿]+", text) if t]


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def trigram_buckets(text):
    toks = tokenize(text)
    if not toks:
        return []
    padded = " " + " ".join(toks) + " "
    return [fnv1a64(padded[i:i + 3].encode()) % DIM for i in range(len(padded) - 2)]


def fit_idf(corpus):
    n = len(corpus)
    df = [0] * DIM
    for doc in corpus:
        for b in set(trigram_buckets(doc)):
            df[b] += 1
    return [math.log((1 + n) / (1 + d)) + 1 for d in df]


def embed(text, idf):
    v = [0.0] * DIM
    for b in trigram_buckets(text):
        v[b] += 1.0
    v = [x * w for x, w in zip(v, idf)]
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v] if norm > 0 else v


def cosine(u, v):
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0 or nv == 0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def bm25(query, doc, corpus):
    docs = [tokenize(d) for d in corpus]
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / n
    d = tokenize(doc)
    score = 0.0
    for t in sorted(set(tokenize(query))):
        tf = d.count(t)
        if tf == 0:
            continue
        df = sum(1 for x in docs if t in x)
        idf = max(0.0, math.log(1 + (n - df + 0.5) / (df + 0.5)))
        score += idf * tf * (K1 + 1) / (tf + K1 * (1 - B + B * len(d) / avgdl))
    return score


def fused(query, corpus, alpha=ALPHA):
    idf = fit_idf(corpus)
    q = embed(query, idf)
    sparse = [bm25(query, d, corpus) for d in corpus]
    dense = [cosine(q, embed(d, idf)) for d in corpus]
    lo, hi = min(sparse), max(sparse)
    sn = [0.5 if hi == lo else (s - lo) / (hi - lo) for s in sparse]
    return [(alpha * a + (1 - alpha) * (c + 1) / 2, s, c) for a, s, c in zip(sn, sparse, dense)]


if __name__ == "__main__":
    print("cosine((1,2,3),(4,5,6)) =", repr(cosine([1, 2, 3], [4, 5, 6])))
    corpus = ["red apple", "green apple pie", "blue sky"]
    for doc in corpus:
        print(f"bm25('apple', {doc!r}) =", repr(bm25("apple", doc, corpus)))
    topics = [
        "How does photosynthesis convert sunlight into chemical energy in plants?",
        "What is the time complexity of binary search on a sorted array?",
        "What were the main causes of the French Revolution?",
    ]
    for doc, (f, s, c) in zip(topics, fused("quicksort algorithm complexity", topics)):
        print(f"fused({doc[:30]!r}) = {f!r} sparse={s!r} dense={c!r}")
    for doc, (f, s, c) in zip(topics, fused(topics[1], topics)):
        print(f"self-query fused({doc[:30]!r}) = {f!r}")
