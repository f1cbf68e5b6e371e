"""TF-IDF n-gram vocabulary and sparse document vectors."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import TokenizedDocument

VOCAB_FORMAT_VERSION = 1


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureConfig:
    ngram_lo: int = 1
    ngram_hi: int = 1
    min_df: int = 1
    sublinear_tf: bool = False
    use_idf: bool = True

    def __post_init__(self):
        if not 1 <= self.ngram_lo <= self.ngram_hi <= 2:
            raise ValueError("ngram range must satisfy 1 <= lo <= hi <= 2")
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")


@dataclass(frozen=True)
class FeatureVector:
    indices: np.ndarray
    weights: np.ndarray
    norm: float = 0.0

    def __len__(self) -> int:
        return len(self.indices)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.weights.tolist()))

    def dot(self, dense: np.ndarray) -> float:
        return float(dense[self.indices] @ self.weights)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: np.ndarray
    n_docs: int
    ngram_range: tuple[int, int] = (1, 1)
    min_df: int = 1
    sublinear_tf: bool = False
    use_idf: bool = True
    term_to_index: dict[str, int] = field(init=False, repr=False, compare=False)
    idf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "term_to_index", {t: i for i, t in enumerate(self.terms)})
        idf = np.log((1.0 + self.n_docs) / (1.0 + self.doc_freq)) + 1.0
        object.__setattr__(self, "idf", idf if self.use_idf else np.ones_like(idf))

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    def to_dict(self) -> dict:
        return {
            "format_version": VOCAB_FORMAT_VERSION,
            "terms": list(self.terms),
            "doc_freqs": [int(x) for x in self.doc_freq],
            "n_docs": self.n_docs,
            "config": {
                "ngram_range": list(self.ngram_range),
                "min_df": self.min_df,
                "sublinear_tf": self.sublinear_tf,
                "use_idf": self.use_idf,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        if d.get("format_version") != VOCAB_FORMAT_VERSION:
            raise VocabularyError(f"unsupported vocabulary format_version {d.get('format_version')!r}")
        cfg = d["config"]
        return cls(
            terms=tuple(d["terms"]),
            doc_freq=np.asarray(d["doc_freqs"], dtype=np.int64),
            n_docs=int(d["n_docs"]),
            ngram_range=tuple(cfg["ngram_range"]),
            min_df=int(cfg["min_df"]),
            sublinear_tf=bool(cfg["sublinear_tf"]),
            use_idf=bool(cfg["use_idf"]),
        )


def extract_ngrams(doc: TokenizedDocument, ngram_range: tuple[int, int] = (1, 1)) -> list[str]:
    """Contiguous n-grams of normalized tokens.

    An n-gram never contains a stop word or a punctuation token; gaps left by
    such tokens break contiguity instead of being skipped over.
    """
    usable = [not t.is_stopword and t.is_word for t in doc.tokens]
    norms = [t.normalized for t in doc.tokens]
    lo, hi = ngram_range
    grams = []
    for n in range(lo, hi + 1):
        for i in range(len(norms) - n + 1):
            if all(usable[i : i + n]):
                grams.append(" ".join(norms[i : i + n]))
    return grams


def fit_vocabulary(
    docs: Sequence[TokenizedDocument],
    ngram_range: tuple[int, int] = (1, 1),
    min_df: int = 1,
    sublinear_tf: bool = False,
    use_idf: bool = True,
) -> Vocabulary:
    FeatureConfig(ngram_range[0], ngram_range[1], min_df)  # validates
    if not docs:
        raise VocabularyError("cannot fit a vocabulary on zero documents")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(extract_ngrams(doc, ngram_range)))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    if not terms:
        raise VocabularyError("empty effective vocabulary")
    return Vocabulary(
        terms=tuple(terms),
        doc_freq=np.array([df[t] for t in terms], dtype=np.int64),
        n_docs=len(docs),
        ngram_range=tuple(ngram_range),
        min_df=min_df,
        sublinear_tf=sublinear_tf,
        use_idf=use_idf,
    )


def fit_vocabulary_with(docs: Sequence[TokenizedDocument], config: FeatureConfig) -> Vocabulary:
    return fit_vocabulary(
        docs, (config.ngram_lo, config.ngram_hi), config.min_df, config.sublinear_tf, config.use_idf
    )


def transform(doc: TokenizedDocument, vocab: Vocabulary) -> FeatureVector:
    counts: Counter[int] = Counter()
    lookup = vocab.term_to_index
    for gram in extract_ngrams(doc, vocab.ngram_range):
        idx = lookup.get(gram)
        if idx is not None:
            counts[idx] += 1
    if not counts:
        return FeatureVector(np.zeros(0, dtype=np.int64), np.zeros(0), 0.0)
    indices = np.array(sorted(counts), dtype=np.int64)
    tf = np.array([counts[i] for i in indices], dtype=float)
    if vocab.sublinear_tf:
        tf = 1.0 + np.log(tf)
    weights = tf * vocab.idf[indices]
    norm = math.sqrt(float(weights @ weights))
    return FeatureVector(indices, weights / norm, norm)


def transform_batch(docs: Sequence[TokenizedDocument], vocab: Vocabulary) -> list[FeatureVector]:
    return [transform(d, vocab) for d in docs]


def to_csr(vectors: Sequence[FeatureVector], n_features: int) -> sp.csr_matrix:
    """Stack feature vectors into a CSR matrix (one row per vector)."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(v)
    if vectors:
        indices = np.concatenate([v.indices for v in vectors])
        data = np.concatenate([v.weights for v in vectors])
    else:
        indices, data = np.zeros(0, dtype=np.int64), np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))
