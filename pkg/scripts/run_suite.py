"""Run every default experiment and write one CSV per sweep.

Usage: python scripts/run_suite.py OUTDIR [--threads N]

Exits 1 if any identity fails or any pinned ratio is exceeded.
"""

import argparse
import sys
import time
from pathlib import Path

from residue_lab.cli import ResultRow, output_columns, render_csv
from residue_lab.experiments import run_experiment
from residue_lab.pins import DEFAULT_PLAN, check_extremes, load_manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    manifest = load_manifest()
    bad = 0
    for i, (name, params) in enumerate(DEFAULT_PLAN):
        t0 = time.perf_counter()
        res = run_experiment(name, dict(params), args.threads)
        rows = [ResultRow.from_raw(name, r) for r in res.rows]
        path = args.outdir / f"{i:02d}_{name}.csv"
        path.write_text(render_csv(output_columns(name, res.columns), rows))
        checks = check_extremes(manifest, res.extremes)
        bad += len(res.failures) + sum(not c.passed for c in checks)
        print(f"{name:18s} {len(rows):6d} rows  {time.perf_counter() - t0:6.1f} s  -> {path}")
        for c in checks:
            print(f"    {c.name:34s} {c.observed:.6g} vs limit {c.limit:.6g}"
                  f"  {'ok' if c.passed else 'EXCEEDED'}")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
