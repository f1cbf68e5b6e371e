"""Deterministic generators for the bundled test fixtures.

``mr_fixture.csv`` is a 2,000-review corpus in MR layout (``label,text``,
lowercase, punctuation split off). Reviews are assembled from templates whose
sentiment slots agree with the label most of the time, so the corpus is
learnable but not trivially separable.

``glove_fixture.txt`` is a 2,000-word, 50-dimensional store in GloVe text
format. Sentiment words are built from a topic direction, a shared polarity
axis and a synonym-group direction plus noise; synonyms land around cosine
0.85, same-topic same-polarity words around 0.55, and unrelated words near 0.
The third member of every synonym group never occurs in the corpus.

Regenerate with ``python -m textshift.fixtures``.
"""

from __future__ import annotations

import csv
import io
from importlib import resources
from pathlib import Path

import numpy as np

REVIEW_SEED = 20230817
STORE_SEED = 50
N_REVIEWS = 2000
STORE_SIZE = 2000
DIM = 50

# topic -> polarity -> synonym groups (frequent, occasional, store-only)
ADJECTIVES = {
    "acting": {
        1: [["convincing", "believable", "credible"], ["brilliant", "superb", "outstanding"], ["charming", "delightful", "endearing"]],
        0: [["wooden", "stiff", "lifeless"], ["unconvincing", "implausible", "unbelievable"], ["annoying", "irritating", "grating"]],
    },
    "story": {
        1: [["clever", "smart", "witty"], ["gripping", "riveting", "compelling"], ["original", "fresh", "inventive"]],
        0: [["predictable", "formulaic", "derivative"], ["confusing", "muddled", "incoherent"], ["silly", "ridiculous", "absurd"]],
    },
    "visuals": {
        1: [["beautiful", "gorgeous", "stunning"], ["vivid", "striking", "lush"]],
        0: [["ugly", "drab", "murky"], ["cheap", "shoddy", "tacky"]],
    },
    "humor": {
        1: [["funny", "hilarious", "amusing"], ["playful", "lively", "spirited"]],
        0: [["unfunny", "lame", "flat"], ["crude", "vulgar", "crass"]],
    },
    "pacing": {
        1: [["snappy", "brisk", "swift"], ["engaging", "absorbing", "involving"]],
        0: [["slow", "sluggish", "plodding"], ["boring", "tedious", "dull"]],
    },
    "overall": {
        1: [["great", "excellent", "wonderful"], ["moving", "touching", "poignant"], ["rare", "sparse", "scarce"]],
        0: [["bad", "awful", "terrible"], ["mediocre", "forgettable", "bland"], ["pointless", "empty", "hollow"]],
    },
}
VERBS = {
    "verbs": {
        1: [["offers", "provides", "prescribes"], ["succeeds", "triumphs", "excels"], ["shines", "soars", "sparkles"]],
        0: [["fails", "falters", "flounders"], ["drags", "stalls", "meanders"], ["disappoints", "frustrates", "underwhelms"]],
    },
}
FEELINGS = {
    "feelings": {
        1: [["love", "adore", "cherish"], ["admire", "applaud", "praise"]],
        0: [["hate", "loathe", "despise"], ["resent", "dislike", "detest"]],
    },
}
NOUNS = [
    "film", "movie", "story", "plot", "script", "screenplay", "cast", "director", "performance",
    "ending", "soundtrack", "dialogue", "pacing", "characters", "camera", "premise", "sequel",
    "humor", "visuals", "effects", "editing", "tone", "audience", "edges", "moments",
    "combination", "entertainment", "education", "score", "finale", "villain", "hero",
    "romance", "production", "narrative", "setting", "twist", "lead", "cinematography",
]
GENRES = ["drama", "comedy", "thriller", "romance", "documentary", "western", "musical", "mystery", "satire", "fable"]
NAMES = ["steers", "nolan", "ramsay", "moreau", "chen", "ortiz", "larsen", "haddad", "kowalski", "okafor", "sato", "brennan"]
ADVERBS = ["quite", "rather", "really", "utterly", "surprisingly", "oddly", "genuinely", "somehow", "mostly", "strangely"]
NEUTRAL_VERBS = ["turns", "feels", "looks", "seems", "becomes", "remains", "plays", "tells", "shows", "tries", "pulls", "curls"]
EXTRA_WORDS = ["the", "a", "an", "and", "but", "it", "it's", "is", "of", "that", "this", "to", "you", "want", "so", "in", "at", "about", "as", "even", "with"]

TEMPLATES = [
    "the {N} is {R} {A} .",
    "{M} {V} in this {A} {G} .",
    "a {A} {N} that {V} .",
    "{M} turns in a {A} {N} , and the {N} feels {A} .",
    "it's a {A} , {A} {G} about the {N} .",
    "the {N} {V} , but the {N} is {A} .",
    "{V} that {A} combination of {N} and {N} .",
    "you want to {F} the {N} , but it {V} .",
    "even the {N} seems {A} .",
    "as a {G} , it's {R} {A} and {A} .",
    "the {N} {U} at the {N} ; it's so {A} you want to {F} it .",
]


def _groups(table: dict) -> list[tuple[str, int, list[str]]]:
    return [(topic, pol, g) for topic, by_pol in table.items() for pol, groups in by_pol.items() for g in groups]


def _pick_sentiment(rng: np.random.Generator, table: dict, polarity: int) -> str:
    groups = [g for _, pol, g in _groups(table) if pol == polarity]
    group = groups[rng.integers(len(groups))]
    return group[0] if rng.random() < 0.7 else group[1]


def make_review(rng: np.random.Generator, label: int, agree: float = 0.72) -> str:
    n_clauses = int(rng.integers(2, 4))
    clauses = []
    for _ in range(n_clauses):
        template = TEMPLATES[rng.integers(len(TEMPLATES))]
        out = []
        for piece in template.split(" "):
            if piece.startswith("{") and piece.endswith("}"):
                slot = piece[1]
                polarity = label if rng.random() < agree else 1 - label
                if slot == "A":
                    out.append(_pick_sentiment(rng, ADJECTIVES, polarity))
                elif slot == "V":
                    out.append(_pick_sentiment(rng, VERBS, polarity))
                elif slot == "F":
                    out.append(_pick_sentiment(rng, FEELINGS, polarity))
                elif slot == "N":
                    out.append(NOUNS[rng.integers(len(NOUNS))])
                elif slot == "G":
                    out.append(GENRES[rng.integers(len(GENRES))])
                elif slot == "M":
                    out.append(NAMES[rng.integers(len(NAMES))])
                elif slot == "R":
                    out.append(ADVERBS[rng.integers(len(ADVERBS))])
                elif slot == "U":
                    out.append(NEUTRAL_VERBS[rng.integers(len(NEUTRAL_VERBS))])
            else:
                out.append(piece)
        clauses.append(" ".join(out))
    return " ".join(clauses)


def make_reviews(n: int = N_REVIEWS, seed: int = REVIEW_SEED, label_noise: float = 0.04) -> list[tuple[int, str]]:
    """Balanced ``(label, text)`` rows; a small fraction carry flipped labels."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = i % 2
        text = make_review(rng, label)
        shown = 1 - label if rng.random() < label_noise else label
        rows.append((shown, text))
    order = rng.permutation(n)
    return [rows[i] for i in order]


def _pseudo_words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    onsets = list("bcdfghjklmnprstvwz") + ["br", "cr", "dr", "st", "tr", "pl", "gr", "sh", "ch"]
    vowels = ["a", "e", "i", "o", "u", "ai", "ou", "ea"]
    out = []
    while len(out) < n:
        word = "".join(onsets[rng.integers(len(onsets))] + vowels[rng.integers(len(vowels))] for _ in range(rng.integers(2, 4)))
        if word not in taken:
            taken.add(word)
            out.append(word)
    return out


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def make_store(size: int = STORE_SIZE, dim: int = DIM, seed: int = STORE_SEED) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)

    def rand():
        return _unit(rng.normal(size=dim))

    polarity_axis = rand()
    store: dict[str, np.ndarray] = {}
    coeff_topic, coeff_pol, coeff_group, coeff_noise = np.sqrt([0.45, 0.10, 0.30, 0.15])
    for table in (ADJECTIVES, VERBS, FEELINGS):
        for topic, by_pol in table.items():
            t_vec = rand()
            for pol, groups in by_pol.items():
                sign = 1.0 if pol == 1 else -1.0
                for group in groups:
                    g_vec = rand()
                    for word in group:
                        vec = coeff_topic * t_vec + coeff_pol * sign * polarity_axis + coeff_group * g_vec + coeff_noise * rand()
                        store.setdefault(word, vec)
    noun_topic = rand()
    for word in NOUNS + GENRES:
        store.setdefault(word, 0.6 * noun_topic + 0.8 * rand())
    for word in NAMES + ADVERBS + NEUTRAL_VERBS + EXTRA_WORDS:
        store.setdefault(word, rand())
    for word in _pseudo_words(rng, size - len(store), set(store)):
        store[word] = rand()
    return {w: np.round(v, 6) for w, v in store.items()}


def write_reviews(path, rows: list[tuple[int, str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "text"])
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_store(path, store: dict[str, np.ndarray]) -> None:
    lines = [w + " " + " ".join(f"{x:.6f}" for x in v) for w, v in store.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture: ``"mr"``, ``"glove"`` or a file name."""
    files = {"mr": "mr_fixture.csv", "glove": "glove_fixture.txt"}
    return Path(str(resources.files("textshift.data").joinpath(files.get(name, name))))


def main() -> None:
    write_reviews(fixture_path("mr"), make_reviews())
    write_store(fixture_path("glove"), make_store())


if __name__ == "__main__":
    main()
