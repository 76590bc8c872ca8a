"""Run configuration: INI files, flag overrides, and resolved copies.

A run is described by one flat config (sections [data], [model],
[train], [run]) plus command-line overrides. Every command persists the
fully resolved config next to its outputs so any artifact can be
regenerated from the directory alone; the resolved text is also hashed
into report metadata.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .nn import DEFAULT_HIDDEN

__all__ = [
    "MODEL_KINDS",
    "RunConfig",
    "load_config",
    "render_config",
    "write_resolved",
    "config_hash",
]

MODEL_KINDS = ("nb", "ffnn_w2v", "ffnn_bow", "cnn_hsv", "fusion")

# section -> field names, in render order
_SECTIONS = {
    "data": ("dataset", "schema", "upsample", "split"),
    "model": (
        "model",
        "embeddings",
        "embeddings_format",
        "filter_embeddings",
        "alpha",
        "vocab_size",
        "hidden",
        "activation",
        "init_mode",
        "init_sigma",
        "folds",
        "in_sample",
    ),
    "train": ("batch_size", "epochs", "lr", "shuffle"),
    "run": ("seed", "out", "runs", "resplit"),
}


@dataclass
class RunConfig:
    # [data]
    dataset: str = ""
    schema: str = "auto"  # "auto" | "key=column,..." mapping
    upsample: bool = False
    split: float = 0.8
    # [model]
    model: str = "nb"
    embeddings: str = ""
    embeddings_format: str = "binary"
    filter_embeddings: bool = True  # keep only words seen in the dataset
    alpha: float = 1.0
    vocab_size: int = 5000
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    activation: str = "relu"
    init_mode: str = "scaled"
    init_sigma: float = 1.0
    folds: int = 5
    in_sample: bool = False
    # [train]
    batch_size: int = 50
    epochs: int = 10
    lr: float = 1e-3
    shuffle: bool = True
    # [run]
    seed: int = 0
    out: str = "runs"
    runs: int = 50
    resplit: bool = True

    def validate(self) -> "RunConfig":
        if self.model not in MODEL_KINDS:
            raise ConfigError(
                f"unknown model kind {self.model!r}; expected one of {MODEL_KINDS}"
            )
        if self.model == "ffnn_w2v" and not self.embeddings:
            raise ConfigError("model 'ffnn_w2v' requires an embeddings path")
        if self.embeddings_format not in ("binary", "text"):
            raise ConfigError(
                f"embeddings_format must be 'binary' or 'text', "
                f"got {self.embeddings_format!r}"
            )
        if not 0.0 < self.split < 1.0:
            raise ConfigError(f"split must be in (0, 1), got {self.split}")
        for name in ("alpha", "init_sigma", "lr"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("vocab_size", "batch_size", "epochs", "folds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.runs < 2:
            raise ConfigError(f"runs must be >= 2, got {self.runs}")
        if self.activation not in ("relu", "linear"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.init_mode not in ("normal", "scaled"):
            raise ConfigError(f"unknown init_mode {self.init_mode!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_hidden(raw: str) -> tuple[int, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    try:
        widths = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"hidden must be a list of integers, got {raw!r}") from None
    if not widths or any(w < 1 for w in widths):
        raise ConfigError(f"hidden widths must be positive integers, got {raw!r}")
    return widths


def _parse_value(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    if name == "hidden":
        return _parse_hidden(raw)
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{name} must be a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a {kind}, got {raw!r}") from None
    return raw


def load_config(path: str | Path) -> RunConfig:
    """Read an INI config; unknown sections or keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(
                f"{path}: unknown section [{section}]; "
                f"expected {sorted(_SECTIONS)}"
            )
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section}]; "
                    f"expected one of {sorted(_SECTIONS[section])}"
                )
            setattr(cfg, key, _parse_value(key, raw))
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Render every field, section by section, in a fixed order."""
    out = io.StringIO()
    for section, names in _SECTIONS.items():
        out.write(f"[{section}]\n")
        for name in names:
            out.write(f"{name} = {_format_value(getattr(cfg, name))}\n")
        out.write("\n")
    return out.getvalue()


def write_resolved(cfg: RunConfig, out_dir: str | Path) -> Path:
    """Persist the resolved config next to a command's outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "config.ini"
    target.write_text(render_config(cfg), encoding="utf-8")
    return target


def config_hash(cfg: RunConfig) -> str:
    """Stable short hash of the resolved config for report metadata."""
    digest = hashlib.sha256(render_config(cfg).encode("utf-8")).hexdigest()
    return digest[:16]
