"""Experiment configuration: q-family, h-grid and list parsing, and merging."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from .arith import primorial, squarefree_upto
from .errors import ConfigError
from .tuples import DEFAULT_MEM_BUDGET

EXPERIMENTS = (
    "verify-identities",
    "moments",
    "gaps",
    "squares",
    "omega-sets",
    "corollary1",
    "bounds-sweep",
)

FORMATS = ("csv", "json")


def parse_int_list(text, field_name: str) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    if isinstance(text, int):
        return [text]
    try:
        text = str(text).strip()
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(field_name, f"expected integers, got {text!r}") from None


def parse_number_list(text, field_name: str) -> list:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [tok for tok in str(text).split(",") if tok.strip()]
    out = []
    for v in vals:
        try:
            f = float(v)
        except ValueError:
            raise ConfigError(field_name, f"not a number: {v!r}") from None
        out.append(int(f) if f.is_integer() else f)
    return out


def expand_q_family(spec: str) -> list[int]:
    """``primorial:N`` (omega 1..N) or ``primorial:a..b``."""
    kind, _, arg = spec.partition(":")
    if kind != "primorial" or not arg:
        raise ConfigError("q_family", f"expected 'primorial:N' or 'primorial:a..b', got {spec!r}")
    if ".." in arg:
        lo, hi = (int(x) for x in arg.split(".."))
    else:
        lo, hi = 1, int(arg)
    if lo < 1 or hi < lo:
        raise ConfigError("q_family", f"bad omega range in {spec!r}")
    return [primorial(w) for w in range(lo, hi + 1)]


def expand_q_range(spec: str) -> list[int]:
    """``a..b``: every squarefree q in [a, b]."""
    try:
        lo, hi = (int(x) for x in spec.split(".."))
    except ValueError:
        raise ConfigError("q_range", f"expected 'a..b', got {spec!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigError("q_range", f"empty range {spec!r}")
    return squarefree_upto(hi, lo)


def h_values(spec, q: int) -> list[int]:
    """Expand an h specification for modulus q.

    Forms: ``7``, ``1,2,5``, ``a..b``, ``a..b:step``, ``log:N`` (N log-spaced
    points in [1, q]) and ``log:a:b:N``.
    """
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(x) for x in spec]
    text = str(spec).strip()
    try:
        if text.startswith("log:"):
            parts = text.split(":")[1:]
            if len(parts) == 1:
                lo, hi, n = 1, q, int(parts[0])
            else:
                lo, hi, n = int(parts[0]), int(parts[1]), int(parts[2])
            grid = np.unique(np.round(np.geomspace(lo, max(hi, lo), n)).astype(np.int64))
            return [int(x) for x in grid]
        if ".." in text:
            rng, _, step = text.partition(":")
            lo, hi = (int(x) for x in rng.split(".."))
            return list(range(lo, hi + 1, int(step) if step else 1))
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ConfigError("h", f"cannot parse h specification {spec!r}") from None


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "json"
    pins: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}")
        mb = self.params.get("mem_budget", DEFAULT_MEM_BUDGET)
        if int(mb) <= 0:
            raise ConfigError("mem_budget", "must be positive")
        th = self.params.get("threads", 1)
        if int(th) <= 0:
            raise ConfigError("threads", "must be positive")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be an object")
    return doc


def merge_params(defaults: dict, from_file: dict, from_flags: dict) -> dict:
    """flags > config file > defaults; ``None`` flags are treated as unset."""
    merged = dict(defaults)
    merged.update({k: v for k, v in from_file.items() if v is not None})
    merged.update({k: v for k, v in from_flags.items() if v is not None})
    return merged


def thread_count(flag: Optional[int]) -> int:
    if flag is not None:
        return int(flag)
    env = os.environ.get("RESIDUE_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("RESIDUE_LAB_THREADS", f"not an integer: {env!r}") from None
    return 1


def resolve_qs(params: dict) -> list[int]:
    """The q list from ``q``, ``q_family`` or ``q_range`` (first one set wins)."""
    if params.get("q") is not None:
        return parse_int_list(params["q"], "q")
    if params.get("q_family"):
        return expand_q_family(params["q_family"])
    if params.get("q_range"):
        return expand_q_range(params["q_range"])
    raise ConfigError("q", "one of --q, --q-family or --q-range is required")
