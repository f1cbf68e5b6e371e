"""GloVe-format word vectors with exact cosine nearest-neighbour search."""

from __future__ import annotations

import gzip
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingStore:
    words: tuple[str, ...]
    vectors: np.ndarray
    word_to_row: dict[str, int] = field(init=False, repr=False, compare=False)
    unit_vectors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.words) or vectors.shape[1] == 0:
            raise EmbeddingError("vectors must be a (n_words, dim>0) matrix")
        if len(set(self.words)) != len(self.words):
            raise EmbeddingError("words must be unique")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0):
            raise EmbeddingError("zero vectors are not allowed")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "word_to_row", {w: i for i, w in enumerate(self.words)})
        object.__setattr__(self, "unit_vectors", vectors / norms[:, None])

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_row

    @classmethod
    def from_dict(cls, mapping: dict[str, "np.ndarray | list[float]"]) -> "EmbeddingStore":
        words = tuple(mapping)
        return cls(words, np.array([mapping[w] for w in words], dtype=float))

    @classmethod
    def empty(cls, dim: int = 1) -> "EmbeddingStore":
        store = object.__new__(cls)
        object.__setattr__(store, "words", ())
        object.__setattr__(store, "vectors", np.zeros((0, dim)))
        object.__setattr__(store, "word_to_row", {})
        object.__setattr__(store, "unit_vectors", np.zeros((0, dim)))
        return store


def load_embeddings(path) -> EmbeddingStore:
    """Read ``word v1 ... vdim`` lines (plain or ``.gz``).

    Duplicate words keep their first occurrence and zero vectors are skipped,
    both with a warning. A dimension mismatch is an error naming the line.
    """
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = None
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split()
                if not parts:
                    continue
                word, values = parts[0], parts[1:]
                if dim is None:
                    dim = len(values)
                    if dim == 0:
                        raise EmbeddingError(f"no vector values at line {line_no}")
                elif len(values) != dim:
                    raise EmbeddingError(f"dimension mismatch at line {line_no}")
                try:
                    vec = np.array([float(v) for v in values])
                except ValueError:
                    raise EmbeddingError(f"non-numeric value at line {line_no}") from None
                if word in seen:
                    logger.warning("duplicate word %r at line %d ignored", word, line_no)
                    continue
                if not np.any(vec):
                    logger.warning("zero vector for %r at line %d skipped", word, line_no)
                    continue
                seen.add(word)
                words.append(word)
                rows.append(vec)
    except OSError as exc:
        raise EmbeddingError(f"cannot read {path}: {exc}") from exc
    if not words:
        raise EmbeddingError(f"no embeddings in {path}")
    return EmbeddingStore(tuple(words), np.vstack(rows))


def cosine(a: str, b: str, store: EmbeddingStore) -> float:
    for w in (a, b):
        if w not in store:
            raise KeyError(f"word not in embedding store: {w!r}")
    u = store.unit_vectors
    sim = float(u[store.word_to_row[a]] @ u[store.word_to_row[b]])
    return min(1.0, max(-1.0, sim))


def nearest_neighbors(word: str, k: int, min_sim: float, store: EmbeddingStore) -> list[tuple[str, float]]:
    """Top-``k`` other words by cosine similarity, at least ``min_sim``.

    Ordered by similarity descending, ties by word. Unknown words get ``[]``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    row = store.word_to_row.get(word)
    if row is None:
        return []
    sims = store.unit_vectors @ store.unit_vectors[row]
    sims[row] = -np.inf
    candidates = np.flatnonzero(sims >= min_sim)
    if len(candidates) > k:
        # keep everything tied with the k-th best so the tie rule sees them all
        kth = -np.partition(-sims[candidates], k - 1)[k - 1]
        candidates = candidates[sims[candidates] >= kth]
    ranked = sorted(candidates.tolist(), key=lambda i: (-sims[i], store.words[i]))[:k]
    return [(store.words[i], float(sims[i])) for i in ranked]
