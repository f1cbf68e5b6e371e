"""Dataset loading and the text preprocessing pipeline.

The pipeline order is fixed: clean -> tokenize -> normalize -> mark_stopwords.
Stop words are flagged rather than deleted so token positions stay stable for
the attack and explanation code.
"""

from __future__ import annotations

import csv
import logging
import math
import re
import unicodedata
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

BUILTIN_STOPWORDS = "builtin"

_TAG_RE = re.compile(r"<[^<>]*>")
_WS_RE = re.compile(r"\s+")
# word: alphanumeric runs joined by internal apostrophes/hyphens; anything
# else that is not whitespace is a one-character punctuation token
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*|[^\s]", re.UNICODE)
_VOWELS = set("aeiouy")


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset input."""


@dataclass(frozen=True)
class Document:
    id: int
    text: str
    label: int


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    span: tuple[int, int]
    is_stopword: bool = False

    @property
    def is_punct(self) -> bool:
        return not any(ch.isalnum() for ch in self.surface)

    @property
    def is_word(self) -> bool:
        return not self.is_punct


@dataclass(frozen=True)
class TokenizedDocument:
    doc_id: int
    cleaned_text: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def word_count(self) -> int:
        """Number of tokens that are not punctuation-only."""
        return sum(1 for t in self.tokens if t.is_word)

    def reconstruct(self) -> str:
        """Rebuild the cleaned text from surfaces and the inter-span gaps."""
        parts = []
        cursor = 0
        for tok in self.tokens:
            start, end = tok.span
            parts.append(self.cleaned_text[cursor:start])
            parts.append(tok.surface)
            cursor = end
        parts.append(self.cleaned_text[cursor:])
        return "".join(parts)

    def with_replacements(self, replacements: dict[int, str]) -> "TokenizedDocument":
        """Return a copy where token ``i`` shows ``replacements[i]``.

        The cleaned text is rebuilt around the new surfaces and spans are
        shifted accordingly; token count never changes.
        """
        parts = []
        tokens = []
        cursor = 0
        out_len = 0
        for i, tok in enumerate(self.tokens):
            start, end = tok.span
            gap = self.cleaned_text[cursor:start]
            parts.append(gap)
            out_len += len(gap)
            surface = replacements.get(i, tok.surface)
            parts.append(surface)
            new_span = (out_len, out_len + len(surface))
            out_len += len(surface)
            if i in replacements:
                tok = replace(tok, surface=surface, normalized=surface.lower())
            tokens.append(replace(tok, span=new_span))
            cursor = end
        parts.append(self.cleaned_text[cursor:])
        return TokenizedDocument(self.doc_id, "".join(parts), tuple(tokens))


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    strip_html: bool = True
    stem: bool = False
    stopword_path: str = BUILTIN_STOPWORDS
    min_token_chars: int = 1

    def __post_init__(self):
        if self.min_token_chars < 1:
            raise ValueError("min_token_chars must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _parse_label(raw: str, line_no: int) -> int:
    try:
        label = int(raw.strip())
    except ValueError:
        raise DatasetError(f"invalid label {raw!r} at line {line_no}") from None
    if label not in (0, 1):
        raise DatasetError(f"label {label} not in {{0, 1}} at line {line_no}")
    return label


def _is_numeric(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def _load_csv(path: Path) -> list[tuple[str, int]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    out = []
    for line_no, row in enumerate(rows, start=1):
        if not row:
            continue
        if line_no == 1 and not _is_numeric(row[0]):
            continue  # header
        if len(row) != 2:
            raise DatasetError(f"expected 2 columns (label,text) at line {line_no}, got {len(row)}")
        out.append((row[1], _parse_label(row[0], line_no)))
    return out


def _load_two_directory(path: Path) -> list[tuple[str, int]]:
    out = []
    for sub, label in (("neg", 0), ("pos", 1)):
        d = path / sub
        if not d.is_dir():
            raise DatasetError(f"missing directory {d}")
        for f in sorted(d.iterdir()):
            if f.is_file():
                try:
                    out.append((f.read_text(encoding="utf-8"), label))
                except (OSError, UnicodeDecodeError) as exc:
                    raise DatasetError(f"cannot read {f}: {exc}") from exc
    return out


def load_dataset(path, format: str = "csv_label_text", config: PreprocessConfig | None = None) -> list[Document]:
    """Load binary-labelled documents.

    ``format`` is ``csv_label_text`` (rows of ``label,text``, optional header)
    or ``two_directory`` (``pos/`` and ``neg/`` holding one review per file).
    Documents whose text is empty after cleaning are dropped with a warning;
    ids are assigned to the surviving documents in input order.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    if format == "csv_label_text":
        rows = _load_csv(path)
    elif format == "two_directory":
        rows = _load_two_directory(path)
    else:
        raise DatasetError(f"unknown dataset format {format!r}")

    config = config or PreprocessConfig()
    docs = []
    for i, (text, label) in enumerate(rows):
        if not clean_text(text, config):
            logger.warning("dropping row %d: empty after cleaning", i)
            continue
        docs.append(Document(len(docs), text, label))
    if not docs:
        raise DatasetError("empty dataset")
    return docs


def load_stopwords(source: str | Path = BUILTIN_STOPWORDS) -> frozenset[str]:
    if str(source) == BUILTIN_STOPWORDS:
        text = resources.files("textshift.data").joinpath("stopwords_en.txt").read_text(encoding="utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def clean_text(raw: str, config: PreprocessConfig | None = None) -> str:
    config = config or PreprocessConfig()
    text = raw
    if config.strip_html:
        text = _TAG_RE.sub(" ", text)
    chars = []
    for ch in text:
        if ch.isspace():
            chars.append(" ")
        elif unicodedata.category(ch) == "Cc":
            continue
        else:
            chars.append(ch)
    return _WS_RE.sub(" ", "".join(chars)).strip()


def tokenize(text: str, config: PreprocessConfig | None = None, doc_id: int = 0) -> TokenizedDocument:
    tokens = tuple(Token(m.group(), m.group(), m.span()) for m in _TOKEN_RE.finditer(text))
    return TokenizedDocument(doc_id, text, tokens)


def stem_word(word: str) -> str:
    """Suffix stripping with a small closed rule table.

    Rules, applied in order: drop a trailing ``'s``; ``sses -> ss``;
    ``ies -> i``; drop a trailing ``s`` after a non-``s`` letter; then drop
    ``ing``/``ed`` when the remaining stem has >= 3 chars including a vowel.
    """
    w = word
    if w.endswith("'s") and len(w) > 2:
        w = w[:-2]
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies") and len(w) > 3:
        w = w[:-2]
    elif len(w) >= 2 and w.endswith("s") and w[-2].isalpha() and w[-2] != "s":
        w = w[:-1]
    for suffix in ("ing", "ed"):
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if len(stem) >= 3 and any(c in _VOWELS for c in stem):
                w = stem
            break
    return w or word


def _normalize_surface(surface: str, config: PreprocessConfig) -> str:
    norm = surface.lower() if config.lowercase else surface
    if config.stem and any(ch.isalpha() for ch in norm):
        norm = stem_word(norm)
    return norm or surface


def normalize(doc: TokenizedDocument, config: PreprocessConfig | None = None) -> TokenizedDocument:
    config = config or PreprocessConfig()
    tokens = tuple(replace(t, normalized=_normalize_surface(t.surface, config)) for t in doc.tokens)
    return replace(doc, tokens=tokens)


def mark_stopwords(doc: TokenizedDocument, stopwords: Iterable[str], min_token_chars: int = 1) -> TokenizedDocument:
    """Flag stop words (and words shorter than ``min_token_chars``)."""
    stopwords = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    tokens = tuple(
        replace(
            t,
            is_stopword=t.normalized in stopwords or (t.is_word and len(t.normalized) < min_token_chars),
        )
        for t in doc.tokens
    )
    return replace(doc, tokens=tokens)


class Preprocessor:
    """Callable bundling a config with its loaded stop-word list."""

    def __init__(self, config: PreprocessConfig | None = None, stopwords: Iterable[str] | None = None):
        self.config = config or PreprocessConfig()
        self.stopwords = frozenset(stopwords) if stopwords is not None else load_stopwords(self.config.stopword_path)

    def __call__(self, text: str, doc_id: int = 0) -> TokenizedDocument:
        cleaned = clean_text(text, self.config)
        doc = normalize(tokenize(cleaned, self.config, doc_id), self.config)
        return mark_stopwords(doc, self.stopwords, self.config.min_token_chars)

    def many(self, docs: Sequence[Document]) -> list[TokenizedDocument]:
        return [self(d.text, d.id) for d in docs]


def preprocess(text: str, config: PreprocessConfig | None = None, doc_id: int = 0) -> TokenizedDocument:
    return Preprocessor(config)(text, doc_id)


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------


def split(docs: Sequence[Document], test_fraction: float, seed: int) -> tuple[list[Document], list[Document]]:
    """Stratified, seeded train/test split.

    Each class contributes ``round(test_fraction * class_size)`` documents to
    the test side. Exact halves alternate between rounding up and down across
    classes (lowest label first rounds up), so two singleton classes at 0.5
    split one and one. Both sides come back ordered by id.
    """
    if len(docs) < 2:
        raise ValueError("split needs at least 2 documents")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    round_up = True
    for label in sorted({d.label for d in docs}):
        members = [d for d in docs if d.label == label]
        quota = test_fraction * len(members)
        n_test = int(math.floor(quota + 0.5))
        if math.isclose(quota - math.floor(quota), 0.5):
            n_test = int(math.floor(quota)) + int(round_up)
            round_up = not round_up
        order = rng.permutation(len(members))
        test.extend(members[i] for i in order[:n_test])
        train.extend(members[i] for i in order[n_test:])
    if not train or not test:
        raise ValueError(f"test_fraction={test_fraction} yields an empty split")
    return sorted(train, key=lambda d: d.id), sorted(test, key=lambda d: d.id)
