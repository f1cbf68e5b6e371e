"""Command-line entry point: ``textshift {train,evaluate,attack,explain,pipeline}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .attack import Status, apply_substitutions, greedy_attack, render_result, summarize, verify_result
from .config import ConfigError, RunConfig, build_config, load_config_file
from .corpus import Document, Preprocessor, load_dataset, split
from .drift import align, compare
from .embeddings import load_embeddings
from .explain import LimeConfig, explain
from .features import fit_vocabulary_with
from .model import LinearTextModel, evaluate, train
from .report import drift_page, explanation_page, index_page

FORMAT_VERSION = 1

logger = logging.getLogger("textshift")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def envelope(cfg: RunConfig, **payload) -> dict:
    return {"format_version": FORMAT_VERSION, "config": cfg.to_dict(), **payload}


def _require_file(value: str | None, what: str) -> Path:
    if not value:
        raise UsageError(f"--{what} is required")
    path = Path(value)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def _load_split(cfg: RunConfig) -> tuple[list[Document], list[Document]]:
    docs = load_dataset(_require_file(cfg.dataset, "dataset"), cfg.dataset_format, cfg.preprocess)
    return split(docs, cfg.test_fraction, cfg.seed)


def _sample(test: list[Document], cfg: RunConfig) -> list[Document]:
    if cfg.sample > len(test):
        raise UsageError(f"--sample {cfg.sample} exceeds the {len(test)} test documents")
    rng = np.random.default_rng(cfg.seed)
    return [test[i] for i in rng.choice(len(test), size=cfg.sample, replace=False)]


def _train_model(cfg: RunConfig, train_docs: list[Document]) -> LinearTextModel:
    pre = Preprocessor(cfg.preprocess)
    pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
    vocab = fit_vocabulary_with([doc for doc, _ in pairs], cfg.features)
    return train(pairs, vocab, cfg.train, cfg.preprocess)


def _model_path(cfg: RunConfig) -> Path:
    return Path(cfg.model) if cfg.model else Path(cfg.out) / "model.json"


def _do_train(cfg: RunConfig, out: Path):
    train_docs, test_docs = _load_split(cfg)
    model = _train_model(cfg, train_docs)
    metrics = {
        "n_train": len(train_docs),
        "n_test": len(test_docs),
        "train_accuracy": evaluate(model, train_docs).accuracy,
        "test_accuracy": evaluate(model, test_docs).accuracy,
    }
    model.save(_model_path(cfg), envelope(cfg))
    write_json(out / "metrics.json", envelope(cfg, **metrics))
    return model, metrics, test_docs


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_train(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    _, metrics, _ = _do_train(cfg, out)
    print(f"train_accuracy={metrics['train_accuracy']:.4f} test_accuracy={metrics['test_accuracy']:.4f}")
    print(f"model written to {_model_path(cfg)}")
    return 0


def cmd_evaluate(cfg: RunConfig, args) -> int:
    model = LinearTextModel.load(_require_file(cfg.model, "model"))
    _, test_docs = _load_split(cfg)
    ev = evaluate(model, test_docs)
    write_json(Path(cfg.out) / "evaluation.json", envelope(cfg, accuracy=ev.accuracy, correct=list(ev.correct)))
    print(f"accuracy={ev.accuracy:.4f} on {len(test_docs)} test documents")
    return 0


def _run_attacks(cfg: RunConfig, model: LinearTextModel, sample: list[Document]):
    store = load_embeddings(_require_file(cfg.embeddings, "embeddings"))
    pre = Preprocessor(model.preprocess)
    docs, results = [], []
    for d in sample:
        doc = pre(d.text, d.id)
        result = greedy_attack(model, doc, d.label, cfg.attack, store)
        check = verify_result(model, result, doc, store)
        if not check:
            raise RuntimeError(f"attack result for doc {d.id} failed re-verification: {check.reason}")
        docs.append(doc)
        results.append(result)
    return docs, results


def _results_payload(cfg: RunConfig, results) -> list:
    summary = summarize(results)
    return [r.to_dict() for r in results] + [envelope(cfg, summary=summary.to_dict())]


def cmd_attack(cfg: RunConfig, args) -> int:
    model = LinearTextModel.load(_require_file(cfg.model, "model"))
    _require_file(cfg.embeddings, "embeddings")
    _, test_docs = _load_split(cfg)
    docs, results = _run_attacks(cfg, model, _sample(test_docs, cfg))
    write_json(Path(cfg.out) / "attack_results.json", _results_payload(cfg, results))
    for doc, r in zip(docs, results):
        if r.status is Status.SUCCESS:
            print(render_result(r, doc, cfg.class_name_list) + "\n")
    _print_summary(summarize(results))
    return 0


def _print_summary(summary) -> None:
    for key, value in asdict(summary).items():
        shown = "n/a" if value is None else (f"{value:.4f}" if isinstance(value, float) else value)
        print(f"{key:>26}: {shown}")


def cmd_explain(cfg: RunConfig, args) -> int:
    model = LinearTextModel.load(_require_file(cfg.model, "model"))
    if args.text is not None:
        text = args.text
    elif args.doc_id is not None:
        docs = load_dataset(_require_file(cfg.dataset, "dataset"), cfg.dataset_format, cfg.preprocess)
        matches = [d for d in docs if d.id == args.doc_id]
        if not matches:
            raise UsageError(f"no document with id {args.doc_id}")
        text = matches[0].text
    else:
        raise UsageError("explain needs --text or --doc-id")
    doc = Preprocessor(model.preprocess)(text)
    if doc.word_count == 0:
        raise UsageError("text is empty after preprocessing")
    expl = explain(model, doc, cfg.lime)
    out = Path(cfg.out)
    write_json(out / "explanation.json", envelope(cfg, **expl.to_dict()))
    write_text(out / "explanation.html", explanation_page(expl, doc, cfg.class_name_list))
    for fw in expl.token_weights:
        print(f"{fw.token:>20} {fw.weight:+.4f}")
    return 0


def cmd_pipeline(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    _require_file(cfg.embeddings, "embeddings")
    if args.skip_train:
        model = LinearTextModel.load(_require_file(cfg.model, "model"))
        _, test_docs = _load_split(cfg)
    else:
        model, _, test_docs = _do_train(cfg, out)
    names = cfg.class_name_list

    docs, results = _run_attacks(cfg, model, _sample(test_docs, cfg))
    write_json(out / "attack_results.json", _results_payload(cfg, results))

    # both sides explain class 1 so weights are directly comparable
    lime = cfg.lime if cfg.lime.target_class is not None else LimeConfig(**{**asdict(cfg.lime), "target_class": 1})
    rows, drift_rows = [], []
    for doc, result in zip(docs, results):
        row = {"doc_id": result.doc_id, "status": result.status.value}
        if result.status is Status.SKIPPED:
            rows.append({**row, "transition": "skipped (already misclassified)"})
            continue
        doc_after = apply_substitutions(doc, result.substitutions)
        before = explain(model, doc, lime)
        after = explain(model, doc_after, lime)
        report = compare(before, after, result.original_pred, result.final_pred, align(doc, result.substitutions), names)
        stem = f"examples/doc{result.doc_id:05d}"
        write_json(out / f"{stem}_explanation_before.json", envelope(cfg, **before.to_dict()))
        write_json(out / f"{stem}_explanation_after.json", envelope(cfg, **after.to_dict()))
        write_json(out / f"{stem}_drift.json", envelope(cfg, doc_id=result.doc_id, status=result.status.value, **report.to_dict()))
        write_text(
            out / f"{stem}.html",
            drift_page(f"Document {result.doc_id}: {result.status.value}", report, before, after, doc, doc_after, names),
        )
        touched_topk = any(s.token_position in before.positions for s in result.substitutions)
        drift_rows.append(
            {
                "doc_id": result.doc_id,
                "status": result.status.value,
                "flipped": report.flipped,
                "topk_jaccard": report.topk_jaccard,
                "spearman_rho": report.spearman_rho,
                "sign_flips": report.sign_flips,
                "substitution_in_topk": touched_topk,
                "max_changed_weight_delta": max(
                    (abs(t.weight_delta) for t in report.aligned if t.changed), default=0.0
                ),
            }
        )
        rows.append({**row, "transition": report.transition_text, "jaccard": report.topk_jaccard, "link": f"{stem}.html"})

    summary = summarize(results)
    write_json(out / "drift_summary.json", envelope(cfg, examples=drift_rows))
    write_text(out / "index.html", index_page("textshift run", asdict(summary), rows))
    _print_summary(summary)
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "attack": cmd_attack,
    "explain": cmd_explain,
    "pipeline": cmd_pipeline,
}

# flag dest -> config key
_FLAG_KEYS = {
    "dataset": "dataset",
    "dataset_format": "dataset_format",
    "model": "model",
    "embeddings": "embeddings",
    "out": "out",
    "seed": "seed",
    "sample": "sample",
    "test_fraction": "test_fraction",
    "epochs": "epochs",
    "max_queries": "max_queries",
    "num_features": "num_features",
    "num_samples": "num_samples",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--dataset", help="CSV (label,text) file or pos/neg directory")
    common.add_argument("--dataset-format", choices=["csv_label_text", "two_directory"])
    common.add_argument("--model", help="model JSON path")
    common.add_argument("--embeddings", help="GloVe-format text file (.gz accepted)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--sample", type=int, help="number of test documents to attack")
    common.add_argument("--test-fraction", type=float)
    common.add_argument("--epochs", type=int)
    common.add_argument("--max-queries", type=int)
    common.add_argument("--num-features", type=int)
    common.add_argument("--num-samples", type=int)
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="any other config key")

    parser = argparse.ArgumentParser(prog="textshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train and save a model")
    sub.add_parser("evaluate", parents=[common], help="accuracy of a saved model on the test split")
    sub.add_parser("attack", parents=[common], help="attack sampled test documents")
    p = sub.add_parser("explain", parents=[common], help="explain one prediction")
    p.add_argument("--text")
    p.add_argument("--doc-id", type=int)
    p = sub.add_parser("pipeline", parents=[common], help="train, attack, explain before/after, compare")
    p.add_argument("--skip-train", action="store_true", help="reuse --model instead of training")
    return parser


def resolve_config(args) -> RunConfig:
    values: dict[str, object] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            values[key] = value
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return build_config(values)


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TEXTSHIFT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: report, exit 1
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
