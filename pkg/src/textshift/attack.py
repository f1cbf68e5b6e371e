"""Score-based black-box word substitution attack.

The search follows the greedy word-importance-ranking scheme: rank words by
how much deleting each one lowers the true-class probability, then walk that
ranking and commit, per position, the admissible substitution that lowers the
true-class probability the most. It stops at the first prediction flip, when
the edit cap or query budget is reached, or when the ranking runs out.

Query accounting: every text scored through the model is one query, the
initial score and the ranking probes included. A new probe is never started
once ``max_queries`` queries have been spent, so ``queries <= max_queries``.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import Token, TokenizedDocument
from .embeddings import EmbeddingStore, nearest_neighbors
from .model import Prediction, QueryView, TextModel

HOMOGLYPHS = {"o": "0", "l": "1", "a": "@", "e": "3", "i": "1", "s": "5"}
SUBSTITUTION_KINDS = ("synonym", "char_swap", "char_delete", "char_insert", "homoglyph")
DEFAULT_CLASS_NAMES = ("Negative", "Positive")

_ALPHA_WORD = re.compile(r"[^\W\d_]+(?:['’\-][^\W\d_]+)*")


class Status(str, Enum):
    SUCCESS = "Success"
    FAILED = "Failed"
    SKIPPED = "Skipped"


@dataclass(frozen=True)
class AttackConfig:
    max_percent_words: float = 0.4
    min_embed_sim: float = 0.5
    candidates_per_word: int = 8
    enable_char_level: bool = True
    max_queries: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.max_percent_words <= 1.0:
            raise ValueError("max_percent_words must be in (0, 1]")
        if self.candidates_per_word < 1:
            raise ValueError("candidates_per_word must be >= 1")
        if self.max_queries < 1:
            raise ValueError("max_queries must be >= 1")


@dataclass(frozen=True)
class Substitution:
    token_position: int
    original: str
    replacement: str
    kind: str

    def __post_init__(self):
        if self.original == self.replacement:
            raise ValueError("substitution must change the token")
        if self.kind not in SUBSTITUTION_KINDS:
            raise ValueError(f"unknown substitution kind {self.kind!r}")


class Candidate(NamedTuple):
    text: str
    kind: str


@dataclass
class ConstraintCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class AttackResult:
    status: Status
    original_text: str
    perturbed_text: str
    original_pred: Prediction
    final_pred: Prediction
    substitutions: tuple[Substitution, ...]
    queries: int
    percent_words_changed: float
    words_in_sentence: int
    truth_label: int
    doc_id: int = 0
    config: AttackConfig = field(default_factory=AttackConfig)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "status": self.status.value,
            "truth_label": self.truth_label,
            "original_text": self.original_text,
            "perturbed_text": self.perturbed_text,
            "original_pred": self.original_pred.to_dict(),
            "final_pred": self.final_pred.to_dict(),
            "substitutions": [asdict(s) for s in self.substitutions],
            "queries": self.queries,
            "percent_words_changed": self.percent_words_changed,
            "words_in_sentence": self.words_in_sentence,
            "config": asdict(self.config),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttackResult":
        return cls(
            status=Status(d["status"]),
            original_text=d["original_text"],
            perturbed_text=d["perturbed_text"],
            original_pred=Prediction(tuple(d["original_pred"]["probs"])),
            final_pred=Prediction(tuple(d["final_pred"]["probs"])),
            substitutions=tuple(Substitution(**s) for s in d["substitutions"]),
            queries=d["queries"],
            percent_words_changed=d["percent_words_changed"],
            words_in_sentence=d["words_in_sentence"],
            truth_label=d["truth_label"],
            doc_id=d.get("doc_id", 0),
            config=AttackConfig(**d["config"]),
        )


@dataclass(frozen=True)
class AttackSummary:
    n_examples: int
    n_success: int
    n_failed: int
    n_skipped: int
    original_accuracy: float
    accuracy_under_attack: float
    success_rate: float | None
    avg_percent_words_changed: float | None
    avg_queries: float | None
    avg_words_per_sentence: float

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def is_eligible(token: Token) -> bool:
    """Attackable: an alphabetic word that is not a stop word."""
    return not token.is_stopword and bool(_ALPHA_WORD.fullmatch(token.surface))


def _without_token(doc: TokenizedDocument, i: int) -> str:
    start, end = doc.tokens[i].span
    return doc.cleaned_text[:start] + doc.cleaned_text[end:]


def apply_substitutions(doc: TokenizedDocument, substitutions: Sequence[Substitution]) -> TokenizedDocument:
    return doc.with_replacements({s.token_position: s.replacement for s in substitutions})


def typo_position(word: str, seed: int) -> int:
    """Seeded character index in ``[1, len(word))`` used by the typo edits."""
    rng = np.random.default_rng([seed, zlib.crc32(word.lower().encode("utf-8"))])
    return int(rng.integers(1, len(word)))


def _match_case(candidate: str, original: str) -> str:
    if original[:1].isupper() and candidate[:1].islower():
        return candidate[0].upper() + candidate[1:]
    return candidate


def char_edits(word: str, seed: int) -> list[Candidate]:
    """One swap, delete and insert at the seeded index, then one homoglyph."""
    out = []
    if len(word) >= 2:
        p = typo_position(word, seed)
        out.append(Candidate(word[: p - 1] + word[p] + word[p - 1] + word[p + 1 :], "char_swap"))
        out.append(Candidate(word[:p] + word[p + 1 :], "char_delete"))
        out.append(Candidate(word[: p + 1] + word[p] + word[p + 1 :], "char_insert"))
    for j, ch in enumerate(word):
        glyph = HOMOGLYPHS.get(ch.lower())
        if glyph is not None:
            out.append(Candidate(word[:j] + glyph + word[j + 1 :], "homoglyph"))
            break
    return [c for c in out if c.text != word]


def generate_candidates(token: Token, store: EmbeddingStore | None, config: AttackConfig) -> list[Candidate]:
    surface = token.surface
    cands: list[Candidate] = []
    if store is not None:
        for word, _ in nearest_neighbors(token.normalized, config.candidates_per_word, config.min_embed_sim, store):
            if _ALPHA_WORD.fullmatch(word):
                cands.append(Candidate(_match_case(word, surface), "synonym"))
    if config.enable_char_level:
        cands.extend(char_edits(surface, config.seed))
    seen = {surface}
    unique = []
    for c in cands:
        if c.text in seen or (c.kind == "synonym" and c.text.lower() == surface.lower()):
            continue
        seen.add(c.text)
        unique.append(c)
    return unique


def check_constraints(
    doc: TokenizedDocument,
    substitutions: Sequence[Substitution],
    config: AttackConfig,
    store: EmbeddingStore | None = None,
) -> ConstraintCheck:
    positions = [s.token_position for s in substitutions]
    for p in positions:
        if not 0 <= p < len(doc.tokens):
            raise ValueError(f"substitution position {p} out of range")
    if len(set(positions)) != len(positions):
        return ConstraintCheck(False, "duplicate_position")
    if substitutions:
        n_words = doc.word_count
        if n_words == 0 or len(substitutions) / n_words > config.max_percent_words + 1e-12:
            return ConstraintCheck(False, "max_percent_words")
    for s in substitutions:
        tok = doc.tokens[s.token_position]
        if tok.is_punct:
            return ConstraintCheck(False, "punctuation")
        if tok.is_stopword:
            return ConstraintCheck(False, "stopword")
        if s.kind == "synonym":
            a, b = tok.normalized, s.replacement.lower()
            if store is None or a not in store or b not in store:
                return ConstraintCheck(False, "embedding_similarity")
            u = store.unit_vectors
            if float(u[store.word_to_row[a]] @ u[store.word_to_row[b]]) < config.min_embed_sim:
                return ConstraintCheck(False, "embedding_similarity")
    return ConstraintCheck(True)


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _rank(view: TextModel, doc: TokenizedDocument, label: int, p_orig: float, budget: int | None):
    eligible = [i for i, t in enumerate(doc.tokens) if is_eligible(t)]
    complete = True
    if budget is not None and len(eligible) > budget:
        eligible, complete = eligible[: max(budget, 0)], False
    preds = view.predict_batch([_without_token(doc, i) for i in eligible])
    scores = {i: p_orig - p.probs[label] for i, p in zip(eligible, preds)}
    return sorted(eligible, key=lambda i: (-scores[i], i)), complete


def rank_word_importance(model: TextModel, doc: TokenizedDocument, label: int | None = None) -> list[int]:
    """Eligible positions ordered by deletion importance for ``label``.

    With no ``label`` the model's prediction on ``doc`` is used (one extra
    query). Ties go to the lower position.
    """
    orig = model.predict(doc.cleaned_text)
    if label is None:
        label = orig.predicted_class
    ranking, _ = _rank(model, doc, label, orig.probs[label], None)
    return ranking


def greedy_attack(
    model: TextModel,
    doc: TokenizedDocument,
    truth_label: int,
    config: AttackConfig | None = None,
    store: EmbeddingStore | None = None,
) -> AttackResult:
    config = config or AttackConfig()
    view = QueryView(model)
    n_words = doc.word_count

    def result(status, subs, final_pred, text):
        return AttackResult(
            status=status,
            original_text=doc.cleaned_text,
            perturbed_text=text,
            original_pred=orig,
            final_pred=final_pred,
            substitutions=tuple(subs),
            queries=view.query_count,
            percent_words_changed=len(subs) / n_words if n_words else 0.0,
            words_in_sentence=n_words,
            truth_label=truth_label,
            doc_id=doc.doc_id,
            config=config,
        )

    orig = view.predict(doc.cleaned_text)
    if orig.predicted_class != truth_label:
        return result(Status.SKIPPED, [], orig, doc.cleaned_text)

    def remaining() -> int:
        return config.max_queries - view.query_count

    ranking, _ = _rank(view, doc, truth_label, orig.probs[truth_label], remaining())
    subs: list[Substitution] = []
    current_pred, current_text = orig, doc.cleaned_text
    for pos in ranking:
        if remaining() <= 0:
            break
        if n_words == 0 or (len(subs) + 1) / n_words > config.max_percent_words + 1e-12:
            break
        tok = doc.tokens[pos]
        trials = []
        for cand in generate_candidates(tok, store, config):
            sub = Substitution(pos, tok.surface, cand.text, cand.kind)
            if check_constraints(doc, subs + [sub], config, store):
                trials.append(sub)
        trials = trials[: remaining()]
        if not trials:
            continue
        texts = [apply_substitutions(doc, subs + [s]).cleaned_text for s in trials]
        preds = view.predict_batch(texts)
        p_true = np.array([p.probs[truth_label] for p in preds])
        best = int(np.argmin(p_true))  # first minimum on ties
        if not p_true[best] < current_pred.probs[truth_label]:
            continue
        subs.append(trials[best])
        current_pred, current_text = preds[best], texts[best]
        if current_pred.predicted_class != truth_label:
            return result(Status.SUCCESS, subs, current_pred, current_text)
    return result(Status.FAILED, subs, current_pred, current_text)


def verify_result(
    model: TextModel,
    result: AttackResult,
    doc: TokenizedDocument,
    store: EmbeddingStore | None = None,
) -> ConstraintCheck:
    """Re-check a result independently of the search that produced it.

    Rebuilds the perturbed text from the substitution record, re-scores it,
    and re-runs the constraints. Costs one query for non-skipped results.
    """
    if result.status is Status.SKIPPED:
        ok = not result.substitutions and result.queries == 1
        return ConstraintCheck(ok, None if ok else "skipped_invariant")
    if result.queries > result.config.max_queries:
        return ConstraintCheck(False, "query_budget")
    rebuilt = apply_substitutions(doc, result.substitutions).cleaned_text
    if rebuilt != result.perturbed_text:
        return ConstraintCheck(False, "perturbed_text_mismatch")
    check = check_constraints(doc, result.substitutions, result.config, store)
    if not check:
        return check
    if result.status is Status.SUCCESS:
        pred = model.predict(rebuilt)
        if pred.predicted_class in (result.original_pred.predicted_class, result.truth_label):
            return ConstraintCheck(False, "no_flip")
    return ConstraintCheck(True)


def summarize(results: Sequence[AttackResult]) -> AttackSummary:
    if not results:
        raise ValueError("summarize needs at least one result")
    n = len(results)
    succ = [r for r in results if r.status is Status.SUCCESS]
    n_failed = sum(r.status is Status.FAILED for r in results)
    n_skipped = sum(r.status is Status.SKIPPED for r in results)
    attempted = len(succ) + n_failed
    return AttackSummary(
        n_examples=n,
        n_success=len(succ),
        n_failed=n_failed,
        n_skipped=n_skipped,
        original_accuracy=(n - n_skipped) / n,
        accuracy_under_attack=n_failed / n,
        success_rate=len(succ) / attempted if attempted else None,
        avg_percent_words_changed=float(np.mean([r.percent_words_changed for r in succ])) if succ else None,
        avg_queries=float(np.mean([r.queries for r in succ])) if succ else None,
        avg_words_per_sentence=float(np.mean([r.words_in_sentence for r in results])),
    )


def _pct(p: float) -> int:
    return int(np.floor(p * 100 + 0.5))


def render_label(pred: Prediction, class_names: Sequence[str] = DEFAULT_CLASS_NAMES) -> str:
    return f"[[{class_names[pred.predicted_class]} ({_pct(pred.confidence)}%)]]"


def render_result(
    result: AttackResult, doc: TokenizedDocument, class_names: Sequence[str] = DEFAULT_CLASS_NAMES
) -> str:
    """Two-line rendering with changed words wrapped in ``[[...]]``."""
    changed = {s.token_position: s.replacement for s in result.substitutions}
    before = doc.with_replacements({i: f"[[{doc.tokens[i].surface}]]" for i in changed}).cleaned_text
    after = doc.with_replacements({i: f"[[{w}]]" for i, w in changed.items()}).cleaned_text
    return (
        f"Original:    {before} {render_label(result.original_pred, class_names)}\n"
        f"Adversarial: {after} {render_label(result.final_pred, class_names)}"
    )
