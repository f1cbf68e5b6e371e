"""Before/after comparison of predictions and explanations."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .attack import DEFAULT_CLASS_NAMES, Substitution, render_label
from .corpus import TokenizedDocument
from .explain import Explanation
from .model import Prediction

SIGN_EPS = 1e-9


@dataclass(frozen=True)
class AlignedToken:
    position: int
    token_before: str
    token_after: str
    changed: bool
    weight_before: float = 0.0
    weight_after: float = 0.0

    @property
    def weight_delta(self) -> float:
        return self.weight_after - self.weight_before


@dataclass(frozen=True)
class DriftReport:
    pred_before: Prediction
    pred_after: Prediction
    flipped: bool
    confidence_delta: tuple[float, float]
    topk_jaccard: float
    spearman_rho: float | None
    sign_flips: int
    aligned: tuple[AlignedToken, ...]
    transition_text: str

    def to_dict(self) -> dict:
        return {
            "pred_before": self.pred_before.to_dict(),
            "pred_after": self.pred_after.to_dict(),
            "flipped": self.flipped,
            "confidence_delta": list(self.confidence_delta),
            "topk_jaccard": self.topk_jaccard,
            "spearman_rho": self.spearman_rho,
            "sign_flips": self.sign_flips,
            "transition_text": self.transition_text,
            "aligned": [asdict(a) for a in self.aligned],
        }


def align(doc_before: TokenizedDocument, substitutions: Sequence[Substitution]) -> list[AlignedToken]:
    """Positional 1:1 alignment driven by the substitution record."""
    by_pos = {}
    for s in substitutions:
        if not 0 <= s.token_position < len(doc_before.tokens):
            raise ValueError(f"substitution position {s.token_position} out of range")
        by_pos[s.token_position] = s.replacement
    return [
        AlignedToken(i, t.surface, by_pos.get(i, t.surface), i in by_pos)
        for i, t in enumerate(doc_before.tokens)
    ]


def spearman(a: Sequence[float], b: Sequence[float]) -> float | None:
    """Spearman's rho with average ranks for ties; None if undefined."""
    if len(a) != len(b) or len(a) < 2:
        return None
    ra, rb = rankdata(a), rankdata(b)
    if np.array_equal(ra, rb):
        return 1.0
    ra, rb = ra - ra.mean(), rb - rb.mean()
    denom = np.sqrt((ra @ ra) * (rb @ rb))
    if denom == 0:
        return None
    return float(np.clip((ra @ rb) / denom, -1.0, 1.0))


def render_transition(
    pred_before: Prediction, pred_after: Prediction, class_names: Sequence[str] = DEFAULT_CLASS_NAMES
) -> str:
    return f"{render_label(pred_before, class_names)} to {render_label(pred_after, class_names)}"


def compare(
    expl_before: Explanation,
    expl_after: Explanation,
    pred_before: Prediction,
    pred_after: Prediction,
    aligned: Sequence[AlignedToken],
    class_names: Sequence[str] = DEFAULT_CLASS_NAMES,
) -> DriftReport:
    """Drift statistics between two explanations of aligned inputs.

    Top-K overlap is the Jaccard index of the two top-K position sets. Rank
    correlation uses ``|weight|`` over positions in both sets. Tokens outside
    an explanation's top-K count as weight 0.
    """
    if expl_before.target_class != expl_after.target_class:
        raise ValueError("explanations must target the same class")
    wb = {fw.position: fw.weight for fw in expl_before.token_weights}
    wa = {fw.position: fw.weight for fw in expl_after.token_weights}
    sb, sa = set(wb), set(wa)
    union = sb | sa
    jaccard = len(sb & sa) / len(union) if union else 1.0
    shared = sorted(sb & sa)
    rho = spearman([abs(wb[p]) for p in shared], [abs(wa[p]) for p in shared])

    filled = tuple(replace(t, weight_before=wb.get(t.position, 0.0), weight_after=wa.get(t.position, 0.0)) for t in aligned)
    flips = sum(
        1
        for t in filled
        if abs(t.weight_before) > SIGN_EPS and abs(t.weight_after) > SIGN_EPS and t.weight_before * t.weight_after < 0
    )
    delta = tuple(float(x) for x in np.subtract(pred_after.probs, pred_before.probs))
    return DriftReport(
        pred_before=pred_before,
        pred_after=pred_after,
        flipped=pred_before.predicted_class != pred_after.predicted_class,
        confidence_delta=delta,
        topk_jaccard=jaccard,
        spearman_rho=rho,
        sign_flips=flips,
        aligned=filled,
        transition_text=render_transition(pred_before, pred_after, class_names),
    )
