"""Static XHTML rendering for explanations, drift panels and run indexes.

Output is well-formed XML (after the doctype line) so every page can be
checked with a strict parser before it is written.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from html import escape
from typing import Sequence

from .attack import DEFAULT_CLASS_NAMES
from .corpus import TokenizedDocument
from .drift import DriftReport
from .explain import Explanation

CLASS_RGB = {0: (255, 127, 14), 1: (31, 119, 180)}  # orange, blue

_CSS = """
body { font-family: sans-serif; margin: 2em; max-width: 70em; }
.sentence { line-height: 2.1em; font-size: 1.1em; }
.tok { padding: 0.15em 0.2em; border-radius: 0.2em; }
.panel { display: inline-block; vertical-align: top; width: 47%; margin-right: 2%; }
.bar { display: inline-block; height: 0.8em; }
table { border-collapse: collapse; }
td, th { border: 1px solid #ccc; padding: 0.3em 0.6em; text-align: left; }
.muted { color: #777; }
"""


class MarkupError(ValueError):
    pass


def check_well_formed(page: str) -> None:
    body = page.split("\n", 1)[1] if page.startswith("<!DOCTYPE") else page
    try:
        ET.fromstring(body)
    except ET.ParseError as exc:
        raise MarkupError(f"generated HTML is not well-formed: {exc}") from exc


def page(title: str, body: str) -> str:
    out = (
        "<!DOCTYPE html>\n"
        '<html xmlns="http://www.w3.org/1999/xhtml"><head><meta charset="utf-8" />'
        f"<title>{escape(title)}</title><style>{_CSS}</style></head>"
        f"<body>{body}</body></html>\n"
    )
    check_well_formed(out)
    return out


def _rgba(cls: int, alpha: float) -> str:
    r, g, b = CLASS_RGB[cls]
    return f"rgba({r},{g},{b},{alpha:.3f})"


def weight_class(weight: float, target_class: int) -> int:
    """Class a signed weight pushes towards."""
    return target_class if weight > 0 else 1 - target_class


def highlighted_sentence(expl: Explanation, doc: TokenizedDocument, changed: Sequence[int] = ()) -> str:
    """Tokens coloured by the class their weight favours, opacity by ``|w|/max|w|``."""
    weights = {fw.position: fw.weight for fw in expl.token_weights}
    peak = max((abs(w) for w in weights.values()), default=0.0)
    spans = []
    for i, tok in enumerate(doc.tokens):
        w = weights.get(i)
        text = escape(tok.surface)
        if i in changed:
            text = f"<b><u>{text}</u></b>"
        if w is None or peak == 0 or w == 0:
            spans.append(f'<span class="tok">{text}</span>')
        else:
            color = _rgba(weight_class(w, expl.target_class), abs(w) / peak)
            spans.append(f'<span class="tok" style="background-color: {color}" title="{w:+.4f}">{text}</span>')
    return '<div class="sentence">' + " ".join(spans) + "</div>"


def feature_bars(expl: Explanation, class_names: Sequence[str] = DEFAULT_CLASS_NAMES) -> str:
    """Feature list with ``weight / sum(|top-K weights|)`` shown as a percentage."""
    total = sum(abs(fw.weight) for fw in expl.token_weights) or 1.0
    rows = []
    for fw in expl.token_weights:
        share = fw.weight / total
        cls = weight_class(fw.weight, expl.target_class)
        width = int(round(abs(share) * 200))
        rows.append(
            f"<tr><td>{escape(fw.token)}</td><td>{share * 100:+.0f}%</td>"
            f'<td><span class="bar" style="width: {width}px; background-color: {_rgba(cls, 0.9)}"></span> '
            f'<span class="muted">{escape(class_names[cls])}</span></td></tr>'
        )
    return "<table><tr><th>word</th><th>importance</th><th></th></tr>" + "".join(rows) + "</table>"


def _prob_line(expl: Explanation, class_names: Sequence[str]) -> str:
    p = expl.prediction.probs
    return (
        f'<p>{escape(class_names[0])}: {p[0]:.2f} &#160; {escape(class_names[1])}: {p[1]:.2f} '
        f'<span class="muted">(explaining class {escape(class_names[expl.target_class])}, '
        f"fidelity R&#178; {expl.fidelity_r2:.3f})</span></p>"
    )


def explanation_page(
    expl: Explanation, doc: TokenizedDocument, class_names: Sequence[str] = DEFAULT_CLASS_NAMES, title: str = "Explanation"
) -> str:
    body = (
        f"<h1>{escape(title)}</h1>"
        + _prob_line(expl, class_names)
        + highlighted_sentence(expl, doc)
        + "<h2>Top features</h2>"
        + feature_bars(expl, class_names)
    )
    return page(title, body)


def drift_panel(
    report: DriftReport,
    expl_before: Explanation,
    expl_after: Explanation,
    doc_before: TokenizedDocument,
    doc_after: TokenizedDocument,
    class_names: Sequence[str] = DEFAULT_CLASS_NAMES,
) -> str:
    changed = [t.position for t in report.aligned if t.changed]
    deltas = sorted(
        (t for t in report.aligned if t.weight_before or t.weight_after),
        key=lambda t: (-abs(t.weight_delta), t.position),
    )
    peak = max((abs(t.weight_delta) for t in deltas), default=0.0) or 1.0
    rows = []
    for t in deltas:
        cls = weight_class(t.weight_delta, expl_before.target_class)
        width = int(round(abs(t.weight_delta) / peak * 200))
        label = escape(t.token_before) if not t.changed else f"{escape(t.token_before)} &#8594; {escape(t.token_after)}"
        rows.append(
            f"<tr><td>{label}</td><td>{t.weight_before:+.4f}</td><td>{t.weight_after:+.4f}</td>"
            f'<td><span class="bar" style="width: {width}px; background-color: {_rgba(cls, 0.9)}"></span></td></tr>'
        )
    rho = "n/a" if report.spearman_rho is None else f"{report.spearman_rho:.3f}"
    return (
        f"<p><b>{escape(report.transition_text)}</b></p>"
        f"<p>top-K Jaccard {report.topk_jaccard:.3f} &#160; Spearman {rho} &#160; sign flips {report.sign_flips}</p>"
        f'<div class="panel"><h3>Before</h3>{_prob_line(expl_before, class_names)}'
        f"{highlighted_sentence(expl_before, doc_before, changed)}</div>"
        f'<div class="panel"><h3>After</h3>{_prob_line(expl_after, class_names)}'
        f"{highlighted_sentence(expl_after, doc_after, changed)}</div>"
        "<h3>Weight change</h3><table><tr><th>word</th><th>before</th><th>after</th><th></th></tr>"
        + "".join(rows)
        + "</table>"
    )


def drift_page(title: str, *args, **kwargs) -> str:
    return page(title, f"<h1>{escape(title)}</h1>" + drift_panel(*args, **kwargs))


def index_page(title: str, summary: dict, rows: Sequence[dict]) -> str:
    """Run overview: summary metrics plus one row per attacked example.

    Each row needs ``doc_id``, ``status``, ``transition`` and optionally
    ``jaccard`` and ``link``.
    """
    metrics = "".join(
        f"<tr><td>{escape(k)}</td><td>{'n/a' if v is None else (f'{v:.4g}' if isinstance(v, float) else v)}</td></tr>"
        for k, v in summary.items()
    )
    lines = []
    for r in rows:
        link = r.get("link")
        doc = f'<a href="{escape(link)}">{r["doc_id"]}</a>' if link else str(r["doc_id"])
        jac = r.get("jaccard")
        lines.append(
            f"<tr><td>{doc}</td><td>{escape(r['status'])}</td><td>{escape(r['transition'])}</td>"
            f"<td>{'' if jac is None else f'{jac:.3f}'}</td></tr>"
        )
    body = (
        f"<h1>{escape(title)}</h1><h2>Attack summary</h2><table>{metrics}</table>"
        "<h2>Examples</h2><table><tr><th>doc</th><th>status</th><th>prediction</th><th>top-K Jaccard</th></tr>"
        + "".join(lines)
        + "</table>"
    )
    return page(title, body)
