"""Gaps between consecutive tuple starts over one period, taken cyclically."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import as_modulus
from .errors import EmptySet
from .tuples import DEFAULT_MEM_BUDGET, OffsetSet, as_offsets, sieve_tuple_starts


@dataclass(frozen=True, eq=False)
class GapStatistics:
    """Starts ``a_1 < a_2 < ...`` in [0, q) and the cyclic gaps between them.

    The last gap wraps around: ``a_1 + q - a_last``.
    """

    q: int
    D: OffsetSet
    starts: np.ndarray
    gaps: np.ndarray
    v: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.starts)

    def V(self, lam):
        """``sum (a_{i+1} - a_i)^lam``: exact int for integer lam, float otherwise."""
        if lam not in self.v:
            self.v[lam] = _power_sum(self.gaps, lam)
        return self.v[lam]


def _is_integral(lam) -> bool:
    return float(lam).is_integer()


def _power_sum(gaps: np.ndarray, lam):
    if _is_integral(lam):
        lam = int(lam)
        hist = np.bincount(gaps)
        return sum(int(c) * g ** lam for g, c in enumerate(hist.tolist()) if c)
    return math.fsum((gaps.astype(np.float64) ** float(lam)).tolist())


def gap_statistics(q, D, lambdas: Iterable = (1, 2),
                   mem_budget: int = DEFAULT_MEM_BUDGET) -> GapStatistics:
    q, D = as_modulus(q), as_offsets(D)
    starts = sieve_tuple_starts(q, D, mem_budget).starts()
    if len(starts) == 0:
        raise EmptySet(f"no tuple starts for q={q.q}, D={D}")
    gaps = np.diff(starts, append=starts[0] + q.q)
    stats = GapStatistics(q.q, D, starts, gaps)
    for lam in lambdas:
        if lam < 1:
            raise ValueError("lambda must be >= 1")
        stats.V(lam)
    return stats


def tail_count(stats: GapStatistics, x: float) -> int:
    """``L(x)``: the number of gaps strictly larger than x."""
    return int(np.count_nonzero(stats.gaps > x))


def v_from_tail(stats: GapStatistics, lam: int) -> int:
    """Rebuild ``V_lam`` from the step function L, exactly.

    L is constant on each ``[g_{j-1}, g_j)`` between distinct gap values, where
    it counts the gaps ``>= g_j``; integrating ``lam x^(lam-1)`` over each
    step gives ``g_j^lam - g_{j-1}^lam``.
    """
    values, counts = np.unique(stats.gaps, return_counts=True)
    at_least = np.cumsum(counts[::-1])[::-1].tolist()
    total, prev = 0, 0
    for g, n in zip(values.tolist(), at_least):
        total += n * (g ** lam - prev ** lam)
        prev = g
    return total


def erdos_ratio(q, D, lam, mem_budget: int = DEFAULT_MEM_BUDGET) -> float:
    """``V_lam / (phi_D(q) P^{-s lam})``."""
    q, D = as_modulus(q), as_offsets(D)
    stats = gap_statistics(q, D, (lam,), mem_budget)
    if _is_integral(lam):
        lam_i = int(lam)
        return float(Fraction(stats.V(lam_i)) * q.P ** (D.s * lam_i) / stats.count)
    return stats.V(lam) * float(q.P) ** (D.s * lam) / stats.count


@dataclass(frozen=True)
class SpacingHistogram:
    edges: np.ndarray
    counts: np.ndarray
    mean_gap: Fraction
    poisson_mass: np.ndarray
    poisson_tail: np.ndarray


def spacing_histogram(stats: GapStatistics, bins: Sequence[float]) -> SpacingHistogram:
    """Histogram of gaps normalised by the mean gap ``q / phi_D``, alongside
    the exponential spacing law: bin masses ``e^{-t0} - e^{-t1}`` and tail
    values ``e^{-t}`` at each edge."""
    if stats.count == 0:
        raise EmptySet("no gaps")
    edges = np.asarray(bins, dtype=np.float64)
    mean = Fraction(stats.q, stats.count)
    normalized = stats.gaps / float(mean)
    counts, _ = np.histogram(normalized, bins=edges)
    tail = np.exp(-edges)
    return SpacingHistogram(edges, counts, mean, tail[:-1] - tail[1:], tail)


RATIO_COLUMNS = ("q", "omega", "lambda", "V_lambda", "bound", "ratio")


def ratio_rows(qs: Iterable[int], D, lambdas: Iterable) -> list[dict]:
    """One row per (q, lambda) comparing ``V_lam`` with ``phi_D(q) P^{-s lam}``."""
    D = as_offsets(D)
    rows = []
    for q in qs:
        qm = as_modulus(q)
        stats = gap_statistics(qm, D, ())
        for lam in lambdas:
            V = stats.V(lam)
            bound = stats.count * float(qm.P) ** (-D.s * lam)
            rows.append({
                "q": qm.q, "omega": qm.omega, "lambda": lam, "V_lambda": V,
                "bound": bound, "ratio": float(V) / bound,
            })
    return rows


def write_ratio_csv(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RATIO_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row[c] for c in RATIO_COLUMNS})
