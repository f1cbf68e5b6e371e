"""Model wrapper interface and a from-scratch linear text classifier.

Attacks and explainers only ever see :class:`TextModel`: text in,
``(p0, p1)`` out, with every scored text counted as one query.
"""

from __future__ import annotations

import json
import threading
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .corpus import Document, PreprocessConfig, Preprocessor, TokenizedDocument
from .features import FeatureVector, Vocabulary, to_csr, transform

MODEL_FORMAT_VERSION = 1
HEADS = ("logistic", "svm")
SVM_SCORE_CLIP = 10.0


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, float]

    @property
    def predicted_class(self) -> int:
        # tie goes to class 0
        return 1 if self.probs[1] > self.probs[0] else 0

    @property
    def confidence(self) -> float:
        return self.probs[self.predicted_class]

    @classmethod
    def from_p1(cls, p1: float) -> "Prediction":
        p1 = float(min(1.0, max(0.0, p1)))
        return cls((1.0 - p1, p1))

    def to_dict(self) -> dict:
        return {"probs": list(self.probs), "predicted_class": self.predicted_class}


class TextModel(ABC):
    """Probability-emitting classifier with a thread-safe query counter.

    Subclasses implement :meth:`score_texts`, returning class-1 probabilities.
    """

    def __init__(self):
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._queries

    def _count(self, n: int) -> None:
        with self._lock:
            self._queries += n

    @abstractmethod
    def score_texts(self, texts: Sequence[str]) -> np.ndarray:
        ...

    def predict(self, text: str) -> Prediction:
        return self.predict_batch([text])[0]

    def predict_batch(self, texts: Sequence[str]) -> list[Prediction]:
        texts = list(texts)
        if not texts:
            return []
        p1 = np.asarray(self.score_texts(texts), dtype=float)
        self._count(len(texts))
        return [Prediction.from_p1(p) for p in p1]


class FunctionModel(TextModel):
    """Wrap a plain ``text -> p1`` callable as a :class:`TextModel`."""

    def __init__(self, fn: Callable[[str], float]):
        super().__init__()
        self.fn = fn

    def score_texts(self, texts):
        return np.array([self.fn(t) for t in texts], dtype=float)


class QueryView(TextModel):
    """Per-owner counting view over a shared model.

    Forwards to the wrapped model (so its counter advances too) while keeping
    a private count, which stays correct when several attacks share a model.
    """

    def __init__(self, inner: TextModel):
        super().__init__()
        self.inner = inner

    def score_texts(self, texts):
        return np.array([p.probs[1] for p in self.inner.predict_batch(texts)])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    l2: float = 1e-4
    seed: int = 0
    shuffle_each_epoch: bool = True
    batch_size: int = 32  # 0 means full batch
    head: str = "logistic"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}")


class LinearTextModel(TextModel):
    """TF-IDF features -> linear score -> probability.

    The logistic head uses sigmoid(w.x + b). The svm head clips the affine
    score to +/-10 before the sigmoid.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        weights: np.ndarray,
        bias: float,
        preprocess: PreprocessConfig | None = None,
        head: str = "logistic",
    ):
        super().__init__()
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(vocab),):
            raise ValueError(f"weights length {weights.shape} != vocabulary size {len(vocab)}")
        if head not in HEADS:
            raise ValueError(f"unknown head {head!r}")
        self.vocab = vocab
        self.weights = weights
        self.bias = float(bias)
        self.preprocess = preprocess or PreprocessConfig()
        self.head = head
        self._pre = Preprocessor(self.preprocess)

    def featurize(self, text: str) -> FeatureVector:
        return transform(self._pre(text), self.vocab)

    def decision(self, vec: FeatureVector) -> float:
        return vec.dot(self.weights) + self.bias

    def score_texts(self, texts):
        z = np.array([self.decision(self.featurize(t)) for t in texts])
        return link(z, self.head)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "head_type": self.head,
            "preprocess": self.preprocess.to_dict(),
            "vocabulary": self.vocab.to_dict(),
            "weights": [float(w) for w in self.weights],
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearTextModel":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {d.get('format_version')!r}")
        return cls(
            Vocabulary.from_dict(d["vocabulary"]),
            np.array(d["weights"], dtype=float),
            float(d["bias"]),
            PreprocessConfig.from_dict(d["preprocess"]),
            d.get("head_type", "logistic"),
        )

    def save(self, path, extra: dict | None = None) -> None:
        payload = self.to_dict()
        if extra:
            payload.update(extra)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LinearTextModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def link(z, head: str = "logistic"):
    if head == "svm":
        z = np.clip(z, -SVM_SCORE_CLIP, SVM_SCORE_CLIP)
    return expit(z)


def loss_and_gradient(
    weights: np.ndarray, bias: float, X, y: np.ndarray, l2: float = 0.0, head: str = "logistic"
) -> tuple[float, np.ndarray, float]:
    """Summed loss over the batch plus ``l2/2 * ||w||^2``, with its gradient.

    ``X`` may be dense or scipy-sparse, one row per example. The logistic head
    uses cross-entropy; the svm head uses hinge loss with labels mapped to
    +/-1 (subgradient 0 at the hinge).
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(X @ weights).ravel() + bias
    if head == "logistic":
        # -[y ln s(z) + (1-y) ln(1-s(z))] == logaddexp(0, z) - y z
        loss = float(np.sum(np.logaddexp(0.0, z) - y * z))
        resid = expit(z) - y
    elif head == "svm":
        ys = 2.0 * y - 1.0
        margin = 1.0 - ys * z
        active = margin > 0
        loss = float(np.sum(margin[active]))
        resid = np.where(active, -ys, 0.0)
    else:
        raise ValueError(f"unknown head {head!r}")
    loss += 0.5 * l2 * float(weights @ weights)
    grad_w = np.asarray(X.T @ resid).ravel() + l2 * weights
    grad_b = float(np.sum(resid))
    return loss, grad_w, grad_b


def batch_loss_and_gradient(model: LinearTextModel, batch: Sequence[tuple[TokenizedDocument, int]], l2: float = 0.0):
    """:func:`loss_and_gradient` for a trained model on ``(doc, label)`` pairs."""
    if not batch:
        raise ValueError("batch must be non-empty")
    X = to_csr([transform(d, model.vocab) for d, _ in batch], len(model.vocab))
    y = np.array([label for _, label in batch], dtype=float)
    return loss_and_gradient(model.weights, model.bias, X, y, l2, model.head)


def fit_linear(X, y: np.ndarray, config: TrainConfig, on_epoch: Callable[[int, float], None] | None = None):
    """Mini-batch gradient descent from zero weights. Returns ``(w, b)``."""
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if len(set(y.tolist())) < 2:
        raise TrainingError("training set must contain both classes")
    rng = np.random.default_rng(config.seed)
    w = np.zeros(d)
    b = 0.0
    bs = config.batch_size or n
    order = np.arange(n)
    for epoch in range(config.epochs):
        if config.shuffle_each_epoch:
            order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            _, gw, gb = loss_and_gradient(w, b, X[idx], y[idx], config.l2, config.head)
            w -= config.learning_rate * gw
            b -= config.learning_rate * gb
        if on_epoch is not None:
            loss, _, _ = loss_and_gradient(w, b, X, y, config.l2, config.head)
            on_epoch(epoch, loss)
    return w, b


def train(
    train_docs: Sequence[tuple[TokenizedDocument, int]] | Sequence[Document],
    vocab: Vocabulary,
    config: TrainConfig | None = None,
    preprocess: PreprocessConfig | None = None,
    on_epoch: Callable[[int, float], None] | None = None,
) -> LinearTextModel:
    """Train a :class:`LinearTextModel` over a fitted vocabulary.

    ``train_docs`` holds ``(TokenizedDocument, label)`` pairs, or raw
    :class:`Document` objects which are preprocessed with ``preprocess``.
    """
    config = config or TrainConfig()
    preprocess = preprocess or PreprocessConfig()
    pairs = list(train_docs)
    if pairs and isinstance(pairs[0], Document):
        pre = Preprocessor(preprocess)
        pairs = [(pre(d.text, d.id), d.label) for d in pairs]
    labels = np.array([lab for _, lab in pairs], dtype=float)
    if len(pairs) == 0 or len(set(labels.tolist())) < 2:
        raise TrainingError("training needs at least one document per class")
    X = to_csr([transform(doc, vocab) for doc, _ in pairs], len(vocab))
    w, b = fit_linear(X, labels, config, on_epoch)
    return LinearTextModel(vocab, w, b, preprocess, config.head)


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    correct: tuple[bool, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(model: TextModel, docs: Sequence[Document]) -> Evaluation:
    if not docs:
        raise ValueError("evaluate needs at least one document")
    preds = model.predict_batch([d.text for d in docs])
    correct = tuple(p.predicted_class == d.label for p, d in zip(preds, docs))
    return Evaluation(sum(correct) / len(correct), correct)
