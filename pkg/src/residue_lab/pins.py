"""Oracle-pin manifests: measured extremal ratios used as regression thresholds."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .experiments import Extreme

MARGIN = 0.05
MANIFEST_VERSION = 1

# The sweeps a default manifest is built from: (experiment, params).
DEFAULT_PLAN: list[tuple[str, dict]] = [
    ("verify-identities", {"qmax": 1}),
    ("bounds-sweep", {"q_family": "primorial:2..6", "offsets": [0, 2], "k": [2, 4]}),
    ("gaps", {"q_family": "primorial:6", "offsets": [0], "lambda": [2, 3]}),
    ("gaps", {"q_family": "primorial:6", "offsets": [0, 2], "lambda": [2, 3]}),
    ("squares", {"q_range": "3..2000", "h_grid": "log:10"}),
    ("omega-sets", {"q_range": "2..2000", "h_grid": "log:8"}),
    ("corollary1", {"X": [20, 50]}),
]


@dataclass(frozen=True)
class PinCheck:
    name: str
    kind: str
    observed: float
    pinned: float
    limit: float

    @property
    def passed(self) -> bool:
        if self.kind == "max":
            return self.observed <= self.limit
        return self.observed >= self.limit


def pin_limit(kind: str, value: float, margin: float = MARGIN) -> float:
    return value * (1 + margin) if kind == "max" else value * (1 - margin)


def default_manifest_path() -> Path:
    return Path(str(resources.files("residue_lab") / "data" / "pins.json"))


def load_manifest(path=None) -> dict:
    path = default_manifest_path() if path is None else Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("pins", f"cannot read manifest {path}: {exc}") from None
    if not isinstance(doc.get("pins"), dict):
        raise ConfigError("pins", f"manifest {path} has no 'pins' object")
    return doc


def build_manifest(extremes: dict[str, Extreme], plan: Optional[list] = None,
                   margin: float = MARGIN) -> dict:
    pins = {
        name: {"kind": ext.kind, "value": ext.value, "where": ext.where}
        for name, ext in sorted(extremes.items())
    }
    return {"version": MANIFEST_VERSION, "margin": margin,
            "plan": [{"experiment": e, "params": p} for e, p in (plan or [])],
            "pins": pins}


def check_extremes(manifest: dict, extremes: dict[str, Extreme]) -> list[PinCheck]:
    """Compare observed extremes with every matching pin; unpinned ones are skipped."""
    margin = float(manifest.get("margin", MARGIN))
    out = []
    for name, ext in sorted(extremes.items()):
        pin = manifest["pins"].get(name)
        if pin is None:
            continue
        out.append(PinCheck(name, pin["kind"], ext.value, pin["value"],
                            pin_limit(pin["kind"], pin["value"], margin)))
    return out


def pin_oracle(plan: list[tuple[str, dict]], threads: int = 1) -> dict:
    """Run every sweep in ``plan`` and pin the extremes it observes."""
    from .experiments import run_experiment

    extremes: dict[str, Extreme] = {}
    for name, params in plan:
        for key, ext in run_experiment(name, dict(params), threads).extremes.items():
            extremes[key] = extremes[key].merge(ext) if key in extremes else ext
    return build_manifest(extremes, plan)
