import numpy as np
import pytest

from textshift.corpus import Preprocessor, load_dataset, split
from textshift.embeddings import load_embeddings
from textshift.features import fit_vocabulary
from textshift.fixtures import fixture_path
from textshift.model import FunctionModel, TrainConfig, train


@pytest.fixture(scope="session")
def mr_docs():
    return load_dataset(fixture_path("mr"))


@pytest.fixture(scope="session")
def mr_split(mr_docs):
    return split(mr_docs, 0.2, 0)


@pytest.fixture(scope="session")
def pre():
    return Preprocessor()


@pytest.fixture(scope="session")
def fixture_model(mr_split, pre):
    train_docs, _ = mr_split
    pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
    vocab = fit_vocabulary([doc for doc, _ in pairs])
    return train(pairs, vocab, TrainConfig(seed=0))


@pytest.fixture(scope="session")
def store():
    return load_embeddings(fixture_path("glove"))


def keyword_model(weights, bias=0.0):
    """Mock model: sigmoid of summed per-word weights over whitespace tokens."""

    def fn(text):
        z = bias + sum(weights.get(w.lower(), 0.0) for w in text.split())
        return 1.0 / (1.0 + np.exp(-z))

    return FunctionModel(fn)


GLOVE = str(fixture_path("glove"))
MR = str(fixture_path("mr"))


def run_cli(argv, cwd, monkeypatch=None):
    """Run the CLI in-process from ``cwd``; returns the exit code."""
    import os

    from textshift.cli import main

    old = os.getcwd()
    os.chdir(cwd)
    try:
        return main([str(a) for a in argv])
    finally:
        os.chdir(old)


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    """One default pipeline run on the bundled fixtures: (out_dir, exit_code, seconds)."""
    import time

    cwd = tmp_path_factory.mktemp("pipeline_a")
    start = time.perf_counter()
    code = run_cli(["pipeline", "--dataset", MR, "--embeddings", GLOVE, "--out", "run"], cwd)
    return cwd / "run", code, time.perf_counter() - start


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
