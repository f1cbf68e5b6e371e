"""Adversarial text attacks and their effect on local explanations."""

from .attack import (
    AttackConfig,
    AttackResult,
    AttackSummary,
    Status,
    apply_substitutions,
    greedy_attack,
    render_result,
    summarize,
)
from .corpus import Document, PreprocessConfig, Preprocessor, TokenizedDocument, load_dataset, split
from .drift import DriftReport, align, compare, render_transition
from .embeddings import EmbeddingStore, load_embeddings, nearest_neighbors
from .explain import Explanation, LimeConfig, explain
from .features import Vocabulary, fit_vocabulary, transform
from .model import LinearTextModel, Prediction, TextModel, TrainConfig, evaluate, train

__version__ = "0.1.0"
