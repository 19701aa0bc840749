"""Plot-ready tables: gap-moment ratios over primorials, the square-window
centering comparison for q = 15, and the desk-scale lower-bound curve.

Usage: python scripts/ratio_tables.py OUTDIR
"""

import csv
import sys
from pathlib import Path

from residue_lab.arith import primorial
from residue_lab.gaps import gap_statistics, ratio_rows, spacing_histogram, write_ratio_csv
from residue_lab.special_sets import corollary1_experiment, squares_profile, thm02_check


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def main(outdir: Path):
    outdir.mkdir(parents=True, exist_ok=True)
    qs = [primorial(w) for w in range(1, 8)]
    for D, tag in (([0], "d0"), ([0, 2], "d02")):
        write_ratio_csv(outdir / f"gap_ratios_{tag}.csv", ratio_rows(qs, D, [1, 2, 3, 4]))

    stats = gap_statistics(primorial(7), [0])
    edges = [i / 4 for i in range(0, 25)]
    hist = spacing_histogram(stats, edges)
    write(outdir / "spacing_510510.csv", ["t0", "t1", "fraction", "exponential_mass"],
          [(edges[i], edges[i + 1], int(c) / stats.count, float(m))
           for i, (c, m) in enumerate(zip(hist.counts, hist.poisson_mass))])

    prof = squares_profile(15)
    rows = []
    for h in range(1, 241):
        rep = thm02_check(prof, h)
        rows.append((h, rep.ratio, rep.extras["ratio_paper"]))
    write(outdir / "squares_q15_centering.csv", ["h", "ratio_exact", "ratio_paper"], rows)

    for X in (20, 50):
        res = corollary1_experiment(X, "grid")
        write(outdir / f"corollary_X{X}.csv", ["h", "ratio"], [(r.h, r.ratio) for r in res.rows])
    print(f"tables written to {outdir}")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "tables"))
