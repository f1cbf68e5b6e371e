import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textshift.embeddings import EmbeddingError, EmbeddingStore, cosine, load_embeddings, nearest_neighbors


def write(tmp_path, text, name="v.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def scan_oracle(word, k, min_sim, store):
    """Exhaustive linear scan: every other word, sorted by (-sim, word)."""
    u = store.unit_vectors
    q = u[store.word_to_row[word]]
    sims = u @ q
    scored = [(w, float(sims[i])) for i, w in enumerate(store.words) if w != word and sims[i] >= min_sim]
    scored.sort(key=lambda p: (-p[1], p[0]))
    return scored[:k]


def tied_store(n=1000, dim=8, seed=0):
    """Random store where every fifth word duplicates an earlier vector (exact ties)."""
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(n, dim))
    for i in range(5, n, 5):
        vecs[i] = vecs[rng.integers(0, i)]
    words = tuple(f"w{rng.permutation(n)[i]:04d}x{i}" for i in range(n))
    return EmbeddingStore(words, vecs)


class TestLoad:
    def test_two_lines(self, tmp_path):
        store = load_embeddings(write(tmp_path, "a 1 0 0\nb 0 1 0\n"))
        assert len(store) == 2 and store.dim == 3

    def test_dimension_mismatch(self, tmp_path):
        with pytest.raises(EmbeddingError, match="dimension mismatch at line 2"):
            load_embeddings(write(tmp_path, "a 1 0 0\nb 0 1\n"))

    def test_duplicate_keeps_first(self, tmp_path, caplog):
        store = load_embeddings(write(tmp_path, "a 1 0\na 0 1\n"))
        assert len(store) == 1 and store.vectors[0].tolist() == [1.0, 0.0]
        assert "duplicate" in caplog.text

    def test_zero_vector_skipped(self, tmp_path, caplog):
        store = load_embeddings(write(tmp_path, "z 0 0\na 1 0\n"))
        assert store.words == ("a",)
        assert "zero vector" in caplog.text

    def test_empty(self, tmp_path):
        with pytest.raises(EmbeddingError):
            load_embeddings(write(tmp_path, ""))

    def test_gzip(self, tmp_path):
        p = tmp_path / "v.txt.gz"
        with gzip.open(p, "wt") as fh:
            fh.write("a 1 2\nb 3 4\n")
        assert load_embeddings(p).words == ("a", "b")

    def test_unit_rows(self, store):
        assert np.allclose(np.linalg.norm(store.unit_vectors, axis=1), 1.0, atol=1e-6)
        assert len(store) == 2000 and store.dim == 50


class TestCosine:
    def setup_method(self):
        self.store = EmbeddingStore.from_dict({"x": [1, 0], "y": [0, 1], "nx": [-1, 0]})

    def test_values(self):
        assert cosine("x", "x", self.store) == pytest.approx(1.0, abs=1e-6)
        assert cosine("x", "y", self.store) == 0.0
        assert cosine("x", "nx", self.store) == -1.0

    def test_missing(self):
        with pytest.raises(KeyError, match="nope"):
            cosine("x", "nope", self.store)


class TestNeighbors:
    def test_impossible_threshold(self, store):
        assert nearest_neighbors("clever", 5, 1.01, store) == []

    def test_absent(self, store):
        assert nearest_neighbors("not-a-word", 5, 0.0, store) == []

    def test_fixture_synonyms(self, store):
        names = [w for w, _ in nearest_neighbors("clever", 2, 0.5, store)]
        assert set(names) == {"smart", "witty"}

    def test_tie_break_by_word(self):
        s = EmbeddingStore.from_dict({"q": [1, 0], "b": [1, 1], "a": [2, 2], "c": [0, 1]})
        assert [w for w, _ in nearest_neighbors("q", 2, -1, s)] == ["a", "b"]

    def test_matches_scan_on_tied_store(self):
        s = tied_store()
        for word in s.words[::37]:
            assert nearest_neighbors(word, 5, -1.0, s) == scan_oracle(word, 5, -1.0, s)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.floats(-1.0, 1.0))
def test_scan_equivalence_property(seed, k, min_sim):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    vecs = rng.integers(-2, 3, size=(n, 3)).astype(float)
    vecs[~vecs.any(axis=1)] = 1.0
    s = EmbeddingStore(tuple(f"w{i}" for i in range(n)), vecs)
    word = s.words[int(rng.integers(n))]
    got = nearest_neighbors(word, k, min_sim, s)
    assert got == scan_oracle(word, k, min_sim, s)
    assert word not in [w for w, _ in got]
    sims = [x for _, x in got]
    assert sims == sorted(sims, reverse=True)
