"""Local surrogate explanations for text (LIME-style).

Word tokens are switched off at random, the model scores each perturbed
text, samples are weighted by an exponential kernel over their cosine
distance to the unperturbed input, and a weighted ridge regression on the
binary masks gives one signed weight per word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import PreprocessConfig, Preprocessor, TokenizedDocument
from .model import Prediction, TextModel


class SurrogateError(ValueError):
    pass


@dataclass(frozen=True)
class LimeConfig:
    num_samples: int = 1000
    num_features: int = 10
    kernel_width: float = 25.0
    ridge_lambda: float = 1.0
    seed: int = 0
    target_class: int | None = None

    def __post_init__(self):
        if self.num_samples < 10:
            raise ValueError("num_samples must be >= 10")
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if not self.kernel_width > 0:
            raise ValueError("kernel_width must be > 0")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        if self.target_class not in (None, 0, 1):
            raise ValueError("target_class must be 0, 1 or None")


@dataclass(frozen=True)
class FeatureWeight:
    position: int
    token: str
    weight: float


@dataclass(frozen=True)
class Explanation:
    text: str
    token_weights: tuple[FeatureWeight, ...]
    intercept: float
    fidelity_r2: float
    prediction: Prediction
    target_class: int

    def weight_at(self, position: int) -> float:
        """Weight of ``position`` or 0.0 when it is outside the top-K."""
        for fw in self.token_weights:
            if fw.position == position:
                return fw.weight
        return 0.0

    @property
    def positions(self) -> list[int]:
        return [fw.position for fw in self.token_weights]

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "target_class": self.target_class,
            "prediction": self.prediction.to_dict(),
            "intercept": self.intercept,
            "fidelity_r2": self.fidelity_r2,
            "features": [
                {"position": fw.position, "token": fw.token, "weight": fw.weight} for fw in self.token_weights
            ],
        }


def sample_masks(n_tokens: int, num_samples: int, seed: int) -> np.ndarray:
    """``(num_samples, n_tokens)`` 0/1 masks; row 0 keeps every token.

    Every other row switches off ``d`` distinct tokens, ``d`` uniform in
    ``[1, n_tokens]``.
    """
    if n_tokens < 1:
        raise ValueError("n_tokens must be >= 1")
    rng = np.random.default_rng(seed)
    masks = np.ones((max(num_samples, 1), n_tokens), dtype=np.int8)
    for row in masks[1:]:
        d = rng.integers(1, n_tokens + 1)
        row[rng.choice(n_tokens, size=d, replace=False)] = 0
    return masks


def mask_to_text(doc: TokenizedDocument, mask) -> str:
    if len(mask) != len(doc.tokens):
        raise ValueError("mask length must equal the token count")
    return " ".join(t.surface for t, keep in zip(doc.tokens, mask) if keep)


def cosine_distance_to_ones(mask) -> float:
    mask = np.asarray(mask, dtype=float)
    on = mask.sum()
    if on == 0:
        return 1.0
    return float(1.0 - on / (np.sqrt(on) * np.sqrt(mask.size)))


def kernel_weight(mask, kernel_width: float = 25.0) -> float:
    d = cosine_distance_to_ones(mask)
    return float(np.exp(-(d**2) / kernel_width**2))


def fit_surrogate(masks, outputs, weights, ridge_lambda: float = 1.0) -> tuple[np.ndarray, float, float]:
    """Weighted ridge regression of ``outputs`` on ``masks``.

    Minimises ``sum_s w_s (y_s - beta.m_s - beta0)^2 + lambda ||beta||^2``
    with the intercept unpenalised, via the normal equations. Returns
    ``(beta, beta0, weighted_r2)``.
    """
    M = np.asarray(masks, dtype=float)
    y = np.asarray(outputs, dtype=float)
    w = np.asarray(weights, dtype=float)
    n, d = M.shape
    X = np.hstack([np.ones((n, 1)), M])
    A = X.T @ (w[:, None] * X)
    A[1:, 1:] += ridge_lambda * np.eye(d)
    rhs = X.T @ (w * y)
    if ridge_lambda == 0 and np.linalg.matrix_rank(A) < d + 1:
        raise SurrogateError("singular surrogate system; use ridge_lambda > 0")
    try:
        coef = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SurrogateError("singular surrogate system; use ridge_lambda > 0") from exc
    resid = y - X @ coef
    sse = float(w @ resid**2)
    y_bar = float(w @ y / w.sum())
    sst = float(w @ (y - y_bar) ** 2)
    # a constant target is explained perfectly by the intercept
    r2 = 1.0 - sse / sst if sst > 0 else (1.0 if sse <= 1e-24 else 0.0)
    return coef[1:], float(coef[0]), r2


def top_k(coefs: Sequence[float], k: int) -> list[int]:
    """Indices of the ``k`` largest ``|coef|``; ties go to the lower index."""
    return sorted(range(len(coefs)), key=lambda i: (-abs(coefs[i]), i))[:k]


def _as_doc(text_or_doc, preprocess: PreprocessConfig | None) -> TokenizedDocument:
    if isinstance(text_or_doc, TokenizedDocument):
        return text_or_doc
    return Preprocessor(preprocess)(text_or_doc)


def explain_masks(
    model: TextModel, doc: TokenizedDocument, feature_masks: np.ndarray, config: LimeConfig
) -> Explanation:
    """Explain ``doc`` from explicit masks over its word tokens.

    Punctuation tokens are not features and always stay in the text. Row 0 of
    ``feature_masks`` is taken to be the unperturbed input.
    """
    features = [i for i, t in enumerate(doc.tokens) if t.is_word]
    feature_masks = np.asarray(feature_masks)
    full = np.ones((len(feature_masks), len(doc.tokens)), dtype=np.int8)
    full[:, features] = feature_masks
    preds = model.predict_batch([mask_to_text(doc, m) for m in full])
    prediction = preds[0]
    target = config.target_class if config.target_class is not None else prediction.predicted_class
    y = np.array([p.probs[target] for p in preds])
    kw = np.array([kernel_weight(m, config.kernel_width) for m in feature_masks])
    coefs, intercept, r2 = fit_surrogate(feature_masks, y, kw, config.ridge_lambda)
    chosen = top_k(coefs, config.num_features)
    weights = tuple(FeatureWeight(features[j], doc.tokens[features[j]].surface, float(coefs[j])) for j in chosen)
    return Explanation(
        text=doc.cleaned_text,
        token_weights=weights,
        intercept=intercept,
        fidelity_r2=r2,
        prediction=prediction,
        target_class=target,
    )


def explain(
    model: TextModel,
    text,
    config: LimeConfig | None = None,
    preprocess: PreprocessConfig | None = None,
) -> Explanation:
    """Explain one prediction. ``text`` may be a string or a tokenized document."""
    config = config or LimeConfig()
    doc = _as_doc(text, preprocess)
    n_features = sum(t.is_word for t in doc.tokens)
    if n_features == 0:
        raise ValueError("text has no word tokens to explain")
    masks = sample_masks(n_features, config.num_samples, config.seed)
    return explain_masks(model, doc, masks, config)
