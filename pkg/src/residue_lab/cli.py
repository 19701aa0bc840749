"""``residue-lab``: run experiments, write CSV/JSON tables, check oracle pins.

Exit status: 0 on success, 1 when an identity fails or a pinned ratio is
exceeded, 2 on configuration (or budget) errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .config import (
    EXPERIMENTS,
    ExperimentConfig,
    load_config_file,
    merge_params,
    thread_count,
)
from .errors import BudgetExceeded, ConfigError, ResidueLabError
from .experiments import ExperimentResult, run_experiment
from .pins import DEFAULT_PLAN, check_extremes, default_manifest_path, load_manifest, pin_oracle

log = logging.getLogger("residue_lab")

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2

# Columns holding exact rationals; each gets a ``<name>_float`` companion.
FRACTION_COLUMNS = {
    "moments": ("M_k",),
    "bounds-sweep": ("M_k",),
    "squares": ("lhs", "lhs_exact", "lhs_paper", "rhs"),
    "omega-sets": ("lhs",),
    "corollary1": ("statistic", "scale"),
}

# flag dest -> params key
PARAM_FLAGS = ("q", "q_family", "q_range", "offsets", "h", "h_grid", "k", "lambda",
               "centering", "mem_budget", "qmax", "X", "system", "epsilon")


@dataclass
class ResultRow:
    """One serialized output row; ``exact`` marks rows carrying rationals."""

    experiment: str
    values: dict = field(default_factory=dict)
    exact: bool = False

    @classmethod
    def from_raw(cls, experiment: str, raw: dict) -> "ResultRow":
        out, exact = {}, False
        for key, v in raw.items():
            if isinstance(v, Fraction):
                exact = True
                out[key] = f"{v.numerator}/{v.denominator}"
                out.setdefault(f"{key}_float", float(v))
            else:
                out[key] = _plain(v)
        return cls(experiment, out, exact)


def _plain(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) > 2 ** 53:
        return str(v)
    return v


def output_columns(experiment: str, columns: Sequence[str]) -> list[str]:
    fracs = FRACTION_COLUMNS.get(experiment, ())
    out = []
    for c in columns:
        out.append(c)
        if c in fracs and f"{c}_float" not in columns:
            out.append(f"{c}_float")
    return out


def render_csv(columns: Sequence[str], rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row.values.get(c) is None else row.values.get(c) for c in columns])
    return buf.getvalue()


def render_json(config: ExperimentConfig, columns, rows, meta: dict) -> str:
    doc = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "rows": [{c: r.values.get(c) for c in columns} for r in rows],
        "meta": meta,
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(config: ExperimentConfig) -> int:
    """Execute one experiment and write its table; returns the exit status."""
    config.validate()
    threads = int(config.params.get("threads", 1))
    t0 = time.perf_counter()
    result: ExperimentResult = run_experiment(config.experiment, dict(config.params), threads)
    runtime_ms = (time.perf_counter() - t0) * 1000

    pin_path = config.pins
    if pin_path is None and default_manifest_path().exists():
        pin_path = str(default_manifest_path())
    checks = check_extremes(load_manifest(pin_path), result.extremes) if pin_path else []

    columns = output_columns(config.experiment, result.columns)
    rows = [ResultRow.from_raw(config.experiment, r) for r in result.rows]
    for c in checks:
        line = (f"pin {c.name}: observed {c.observed:.6g}, pinned {c.pinned:.6g}, "
                f"limit {c.limit:.6g} -> {'ok' if c.passed else 'EXCEEDED'}")
        (log.info if c.passed else log.error)(line)
    for f in result.failures:
        log.error("identity failure: %s", f)

    if config.format == "csv":
        _emit(render_csv(columns, rows), config.out)
    else:
        meta = {
            "version": __version__,
            "runtime_ms": round(runtime_ms, 3),
            "exact_rows": sum(r.exact for r in rows),
            "pin_checks": [
                {"name": c.name, "kind": c.kind, "observed": c.observed, "pinned": c.pinned,
                 "limit": c.limit, "passed": c.passed} for c in checks
            ],
            "failures": list(result.failures),
        }
        _emit(render_json(config, columns, rows, meta), config.out)

    if result.failures or not all(c.passed for c in checks):
        return EXIT_ASSERT
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    q = p.add_mutually_exclusive_group()
    q.add_argument("--q", help="modulus or comma list of moduli")
    q.add_argument("--q-family", dest="q_family", help="primorial:N or primorial:a..b")
    q.add_argument("--q-range", dest="q_range", help="every squarefree q in a..b")
    p.add_argument("--offsets", help="offset set, e.g. 0,2,6")
    hg = p.add_mutually_exclusive_group()
    hg.add_argument("--h", help="window length(s)")
    hg.add_argument("--h-grid", dest="h_grid", help="a..b, a..b:step, log:N or log:a:b:N")
    p.add_argument("--k", help="moment orders, comma list")
    p.add_argument("--lambda", dest="lambda", help="gap exponents, comma list")
    p.add_argument("--centering", choices=("exact", "paper"))
    p.add_argument("--qmax", type=int, help="largest q for verify-identities")
    p.add_argument("--X", dest="X", help="corollary1 scale(s)")
    p.add_argument("--system", help="residue-class system JSON for omega-sets")
    p.add_argument("--epsilon", type=float, help="omega-sets hypothesis exponent slack")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--pins", help="pin manifest (default: the packaged one)")
    p.add_argument("--mem-budget", dest="mem_budget", type=int,
                   help="largest sieve length allowed")
    p.add_argument("--threads", type=int)
    p.add_argument("--config", help="JSON config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="residue-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_run_flags(sub.add_parser(name, help=f"run the {name} experiment"))
    pin = sub.add_parser("pin", help="run oracle sweeps and write a pin manifest")
    pin.add_argument("--config", help='JSON plan: {"sweeps": [{"experiment", "params"}]}')
    pin.add_argument("--out", help="manifest path (default stdout)")
    pin.add_argument("--threads", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_doc = load_config_file(args.config) if args.config else {}
    file_params = dict(file_doc.get("params", {}))
    flag_params = {k: getattr(args, k) for k in PARAM_FLAGS}
    params = merge_params({}, file_params, flag_params)
    params["threads"] = thread_count(args.threads if args.threads is not None
                                     else file_params.get("threads"))

    def pick(name, default):
        v = getattr(args, name)
        return v if v is not None else file_doc.get(name, default)

    return ExperimentConfig(args.command, params, out=pick("out", None),
                            format=pick("format", "json"), pins=pick("pins", None)).validate()


def _plan_from_file(path) -> list[tuple[str, dict]]:
    doc = load_config_file(path)
    sweeps = doc.get("sweeps")
    if not isinstance(sweeps, list):
        raise ConfigError("sweeps", "plan must contain a 'sweeps' list")
    plan = []
    for i, s in enumerate(sweeps):
        if s.get("experiment") not in EXPERIMENTS:
            raise ConfigError(f"sweeps[{i}].experiment", f"unknown {s.get('experiment')!r}")
        plan.append((s["experiment"], dict(s.get("params", {}))))
    return plan


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "pin":
            plan = _plan_from_file(args.config) if args.config else DEFAULT_PLAN
            manifest = pin_oracle(plan, thread_count(args.threads))
            _emit(json.dumps(manifest, indent=1) + "\n", args.out)
            return EXIT_OK
        return run(config_from_args(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResidueLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
