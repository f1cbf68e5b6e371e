"""Run configuration: flat ``key=value`` files merged with command-line overrides."""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .attack import AttackConfig
from .corpus import PreprocessConfig
from .explain import LimeConfig
from .features import FeatureConfig
from .model import TrainConfig

SECTIONS = {
    "preprocess": PreprocessConfig,
    "features": FeatureConfig,
    "train": TrainConfig,
    "attack": AttackConfig,
    "lime": LimeConfig,
}
SEEDED = ("train", "attack", "lime")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dataset: str | None = None
    dataset_format: str = "csv_label_text"
    embeddings: str | None = None
    model: str | None = None
    out: str = "textshift_out"
    sample: int = 10
    seed: int = 0
    test_fraction: float = 0.2
    class_names: str = "Negative,Positive"
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    lime: LimeConfig = field(default_factory=LimeConfig)

    @property
    def class_name_list(self) -> tuple[str, str]:
        names = tuple(n.strip() for n in self.class_names.split(","))
        if len(names) != 2 or not all(names):
            raise ConfigError("class_names must be two comma-separated names")
        return names

    def to_dict(self) -> dict:
        return asdict(self)


def _convert(raw: str, tp, key: str):
    origin = typing.get_origin(tp)
    args = [a for a in typing.get_args(tp) if a is not type(None)]
    if origin in (typing.Union, types.UnionType) and args:
        if raw.strip().lower() in ("", "none", "null"):
            return None
        return _convert(raw, args[0], key)
    try:
        if tp is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None
    return raw.strip()


def _field_types(cls) -> dict:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls) if f.init}


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value at config line {line_no}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def load_config_file(path) -> dict[str, str]:
    try:
        return parse_config_text(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


def build_config(values: dict[str, object]) -> RunConfig:
    """Resolve flat overrides into a validated :class:`RunConfig`.

    String values are converted to each field's type. ``seed`` also seeds the
    training, attack and explanation stages.
    """
    top_types = {k: v for k, v in _field_types(RunConfig).items() if k not in SECTIONS}
    owners = {}
    for section, cls in SECTIONS.items():
        for name, tp in _field_types(cls).items():
            if name != "seed":
                owners[name] = (section, tp)

    top: dict[str, object] = {}
    sections: dict[str, dict[str, object]] = {s: {} for s in SECTIONS}
    for key, raw in values.items():
        key = key.replace("-", "_")
        if key in top_types:
            tp = top_types[key]
            top[key] = _convert(raw, tp, key) if isinstance(raw, str) else raw
        elif key in owners:
            section, tp = owners[key]
            sections[section][key] = _convert(raw, tp, key) if isinstance(raw, str) else raw
        else:
            raise ConfigError(f"unknown config key {key!r}")
    seed = top.get("seed", 0)
    for section in SEEDED:
        sections[section]["seed"] = seed
    try:
        built = {name: SECTIONS[name](**kw) for name, kw in sections.items()}
        cfg = RunConfig(**top, **built)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.sample < 1:
        raise ConfigError("sample must be >= 1")
    if not 0.0 < cfg.test_fraction < 1.0:
        raise ConfigError("test_fraction must be in (0, 1)")
    if cfg.dataset_format not in ("csv_label_text", "two_directory"):
        raise ConfigError(f"unknown dataset_format {cfg.dataset_format!r}")
    cfg.class_name_list
    return cfg
