"""
Window moments of tuple-start counts and the bounds they are compared to.

The direct moment is exact: with ``W(n)`` the cyclic window count and
``phi_D`` the number of tuple starts per period, every residual is
``(q W(n) - h phi_D) / q``, so the k-th moment is an integer over ``q**k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import SquarefreeModulus, as_modulus
from .errors import BudgetExceeded, PreconditionViolated, ZeroDensity
from .identities import (
    DEFAULT_TERM_BUDGET,
    E_h_sq,
    character_profile,
    coprime_residues,
    residue_sets,
)
from .tuples import DEFAULT_MEM_BUDGET, OffsetSet, as_offsets, sieve_tuple_starts, window_counts

MAX_K = 8


@dataclass(frozen=True)
class WindowMoment:
    q: int
    D: OffsetSet
    h: int
    k: int
    scaled_numerator: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.scaled_numerator, self.q ** self.k)

    @property
    def float_value(self) -> float:
        return float(self.value)


def centered_power_sum(counts: np.ndarray, scale: int, center: int, k: int) -> int:
    """Exact ``sum_n (scale * counts[n] - center)**k`` using a histogram of counts."""
    hist = np.bincount(counts)
    return sum(int(c) * (scale * w - center) ** k for w, c in enumerate(hist.tolist()) if c)


def moment_direct(q, D, h: int, k: int, mem_budget: int = DEFAULT_MEM_BUDGET) -> WindowMoment:
    q, D = as_modulus(q), as_offsets(D)
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must lie in [1, {MAX_K}]")
    sieve = sieve_tuple_starts(q, D, mem_budget)
    W = window_counts(sieve, h)
    num = centered_power_sum(W, q.q, h * sieve.popcount, k)
    return WindowMoment(q.q, D, h, k, num)


@lru_cache(maxsize=512)
def _k2_profile(q: SquarefreeModulus, key: tuple):
    """Per divisor r > 1: (1/phi_D(r)^2, a's, |mu_D(a, r)|^2)."""
    sets = {p: frozenset(v) for p, v in key}
    phi = {p: p - len(sets[p]) for p in q.primes}
    if any(v == 0 for v in phi.values()):
        raise ZeroDensity(f"phi_D({q.q}) = 0")
    P_D = Fraction(math.prod(phi.values()), q.q)
    rows = []
    for r in q.divisors[1:]:
        rm = q.sub(r)
        a = coprime_residues(r)
        mu2 = np.abs(character_profile(sets, rm).mu(a)) ** 2
        rows.append((r, 1.0 / math.prod(phi[p] for p in rm.primes) ** 2, a, mu2))
    return P_D, rows


def variance_expsum(q, class_sets, h: int, budget: int = DEFAULT_TERM_BUDGET) -> float:
    """Second moment from the exponential-sum side:

    ``q P_D^2 sum_{r|q, r>1} phi_D(r)^{-2} sum_{(a,r)=1} |E_h(a/r) mu_D(a,r)|^2``

    ``class_sets`` is an offset set or a mapping ``p -> D_p``.
    """
    q = as_modulus(q)
    cost = sum(q.divisors)
    if cost > budget:
        raise BudgetExceeded("sum of divisors", cost, budget)
    sets = residue_sets(class_sets, q.primes)
    key = tuple((p, tuple(sorted(sets[p]))) for p in q.primes)
    P_D, rows = _k2_profile(q, key)
    partial = [w * math.fsum(E_h_sq(a, r, h) * mu2) for r, w, a, mu2 in rows]
    return q.q * float(P_D) ** 2 * math.fsum(partial)


def moment_expsum_k2(q, D, h: int, budget: int = DEFAULT_TERM_BUDGET) -> float:
    return variance_expsum(q, as_offsets(D), h, budget)


# --------------------------------------------------------------------------
# Binomial moments


@lru_cache(maxsize=None)
def stirling2(r: int, t: int) -> int:
    """Stirling number of the second kind; ``S(0, 0) = 1``, ``S(r, 0) = 0``."""
    if not 0 <= t <= r:
        return 0
    if r == 0:
        return 1
    if t == 0:
        return 0
    return t * stirling2(r - 1, t) + stirling2(r - 1, t - 1)


def binomial_moment(h: int, P, k: int) -> Fraction:
    """k-th central moment of Binomial(h, P), via

    ``E X^r = sum_t C(h, t) S(r, t) t! P^t``.
    """
    P = Fraction(P)
    if h < 0 or k < 0 or not 0 <= P <= 1:
        raise ValueError("need h >= 0, k >= 0, 0 <= P <= 1")
    mean = h * P
    total = Fraction(0)
    for r in range(k + 1):
        raw = sum(
            (math.comb(h, t) * stirling2(r, t) * math.factorial(t) * P ** t for t in range(r + 1)),
            Fraction(0),
        )
        total += math.comb(k, r) * (-mean) ** (k - r) * raw
    return total


# --------------------------------------------------------------------------
# Bound evaluators

BOUND_KINDS = ("lemma12", "lemma21", "lemma31", "thm42_small_h", "thm42_general", "mv_mu_k")


@dataclass(frozen=True)
class BoundReport:
    """A bound's right side (implied constant omitted) against an observation.

    ``log_bound`` is the natural log of the bound; ratios are computed in log
    space so huge exponents never overflow.
    """

    kind: str
    inputs: dict
    log_bound: float
    observed: Optional[float] = None
    extras: dict = field(default_factory=dict)

    @property
    def bound_value(self) -> float:
        try:
            return math.exp(self.log_bound)
        except OverflowError:
            return math.inf

    @property
    def ratio(self) -> Optional[float]:
        if self.observed is None:
            return None
        if self.observed == 0:
            return 0.0
        if self.observed < 0:
            return -math.exp(math.log(-self.observed) - self.log_bound)
        return math.exp(math.log(self.observed) - self.log_bound)


def _log(x) -> float:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive value")
    return math.log(x.numerator) - math.log(x.denominator)


def _log_sum(*logs: float) -> float:
    m = max(logs)
    return m + math.log(math.fsum(math.exp(v - m) for v in logs))


def _log_observed(observed) -> Optional[float]:
    return None if observed is None else float(observed)


def y_split(q: SquarefreeModulus, y: float):
    """``q_1`` = product of p | q with p <= y, ``q_2`` the rest."""
    small = tuple(p for p in q.primes if p <= y)
    large = tuple(p for p in q.primes if p > y)
    return SquarefreeModulus(math.prod(small), small), SquarefreeModulus(math.prod(large), large)


def theoretical_bound(kind: str, observed=None, **params) -> BoundReport:
    """Evaluate one of the bound right sides named in :data:`BOUND_KINDS`.

    Parameters by kind: ``q, h, k, s`` for the moment bounds (``lemma31``
    also accepts ``y`` and ``A``); ``h, P, k`` for ``mv_mu_k``.
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    k = int(params["k"])
    h = int(params["h"])
    obs = _log_observed(observed)

    if kind == "mv_mu_k":
        hP = h * Fraction(params["P"])
        if hP <= 0:
            raise PreconditionViolated("h P > 0")
        log_b = _log_sum(k // 2 * _log(hP), _log(hP))
        return BoundReport(kind, {"h": h, "P": str(Fraction(params["P"])), "k": k}, log_b, obs)

    q = as_modulus(params["q"])
    s = int(params.get("s", 1))
    P = q.P
    inputs = {"q": q.q, "h": h, "k": k, "s": s}
    log_q, log_h, log_P = math.log(q.q), math.log(h), _log(P)

    if kind == "lemma12":
        log_b = log_q + k / 2 * log_h + (-(2 ** (k * s)) + k * s) * log_P
        return BoundReport(kind, inputs, log_b, obs)

    if kind in ("lemma21", "lemma31") and k % 2:
        raise PreconditionViolated("k even", f"k = {k}")

    hPs = _log(h * P ** s)
    main = _log_sum(log_q + k // 2 * hPs, log_q + hPs)

    if kind == "lemma21":
        return BoundReport(kind, inputs, main, obs)

    if kind == "lemma31":
        if not h > 1 / P:
            raise PreconditionViolated("h > 1/P", f"h = {h}, 1/P = {float(1 / P):.4g}")
        A = float(params.get("A", k + 1))
        y = float(params.get("y", h ** k + 1))
        if A <= k:
            raise PreconditionViolated("A > k", f"A = {A}")
        if not h ** k < y < h ** A:
            raise PreconditionViolated("h^k < y < h^A", f"y = {y}")
        q1, q2 = y_split(q, y)
        log_P1, log_P2 = _log(q1.P), _log(q2.P)
        tail = log_q + k / 2 * log_h + (-(2 ** (k * s)) + k * s) * log_P1 + s * k * log_P2
        inputs.update(y=y, A=A, q1=q1.q, q2=q2.q)
        return BoundReport(kind, inputs, _log_sum(main, tail), obs)

    if kind == "thm42_small_h":
        limit = math.exp(1 / (k * float(P) ** (1 / s)))
        if not h < limit:
            raise PreconditionViolated("h < exp(1/(k P^(1/s)))", f"h = {h}, limit = {limit:.4g}")
        return BoundReport(kind, inputs, log_q + k / 2 * hPs, obs)

    # thm42_general
    log_b = log_q + k / 2 * log_h + (s * k - s * s * k / 2) * log_P
    return BoundReport(kind, inputs, log_b, obs)
