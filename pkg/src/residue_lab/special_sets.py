"""
Residue-class systems modulo squarefree q: squares, general per-prime
forbidden sets ``Omega_p``, and the even-step sets ``{0, 2, ..., p-1}``.

A system forbids the classes ``Omega_p`` modulo each p | q.  The numbers it
allows are exactly the tuple starts of any offset set with
``D mod p = -Omega_p``, which is how the exponential-sum machinery of
:mod:`residue_lab.identities` applies to it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .arith import SquarefreeModulus, as_modulus, crt_combine, primes_in_range
from .errors import BudgetExceeded, EvenModulus, InsufficientPrimes, PreconditionViolated
from .identities import roots_of_unity
from .moments import BoundReport, centered_power_sum, variance_expsum
from .tuples import DEFAULT_MEM_BUDGET, OffsetSet, allowed_mask, cyclic_window_counts


@dataclass(frozen=True, eq=False)
class ResidueClassSystem:
    modulus: SquarefreeModulus
    classes: dict[int, frozenset[int]]
    weyl: dict[int, float] = field(default_factory=dict)

    @classmethod
    def build(cls, q, classes: Mapping[int, Iterable[int]]) -> "ResidueClassSystem":
        q = as_modulus(q)
        extra = set(int(p) for p in classes) - set(q.primes)
        if extra:
            raise ValueError(f"classes given for primes not dividing {q.q}: {sorted(extra)}")
        sets = {}
        for p in q.primes:
            omega = frozenset(int(x) % p for x in classes.get(p, ()))
            if len(omega) >= p:
                raise ValueError(f"Omega_{p} covers every class; nothing would remain")
            sets[p] = omega
        return cls(q, sets)

    @classmethod
    def from_json(cls, doc) -> "ResidueClassSystem":
        """Load ``{"primes": [p, ...], "classes": {"p": [x, ...]}}``."""
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        primes = sorted(int(p) for p in doc["primes"])
        classes = {int(p): v for p, v in doc.get("classes", {}).items()}
        return cls.build(SquarefreeModulus(math.prod(primes), tuple(primes)), classes)

    @classmethod
    def load(cls, path) -> "ResidueClassSystem":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {
            "primes": list(self.modulus.primes),
            "classes": {str(p): sorted(v) for p, v in self.classes.items()},
        }

    @property
    def c(self) -> dict[int, Fraction]:
        return {p: Fraction(len(v), p) for p, v in self.classes.items()}

    @property
    def allowed_count(self) -> int:
        return math.prod(p - len(v) for p, v in self.classes.items())

    @property
    def allowed_density(self) -> Fraction:
        return Fraction(self.allowed_count, self.modulus.q)

    def offset_sets(self) -> dict[int, frozenset[int]]:
        """``D_p = -Omega_p``: the per-prime offsets whose tuple starts are the
        allowed numbers."""
        return {p: frozenset((-x) % p for x in v) for p, v in self.classes.items()}

    def allowed_mask(self, mem_budget: int = DEFAULT_MEM_BUDGET) -> np.ndarray:
        return allowed_mask(self.modulus, self.classes, mem_budget)

    def covered_mask(self) -> np.ndarray:
        """n in [0, q) with ``n mod p`` in ``Omega_p`` for every p."""
        n = np.arange(self.modulus.q, dtype=np.int64)
        out = np.ones(self.modulus.q, dtype=bool)
        for p, v in self.classes.items():
            hit = np.zeros(p, dtype=bool)
            hit[sorted(v)] = True
            out &= hit[n % p]
        return out


def induced_offset_set(system: ResidueClassSystem) -> OffsetSet:
    """An integer offset set D in [0, q) with ``D mod p = -Omega_p`` for all p."""
    sets = {p: sorted(v) for p, v in system.offset_sets().items()}
    if any(not v for v in sets.values()):
        raise ValueError("an empty Omega_p has no offset-set realisation")
    s = max((len(v) for v in sets.values()), default=1)
    if not sets:
        return OffsetSet([0])
    return OffsetSet(
        {crt_combine((v[i % len(v)], p) for p, v in sets.items()) for i in range(s)}
    )


def system_from_offsets(q, D) -> ResidueClassSystem:
    """The system forbidding ``-D mod p``, whose allowed set is the tuple starts of D."""
    q = as_modulus(q)
    D = D if isinstance(D, OffsetSet) else OffsetSet(D)
    return ResidueClassSystem.build(q, {p: [-x for x in D.residues(p)] for p in q.primes})


# --------------------------------------------------------------------------
# Weyl constants


def character_sum_magnitudes(p: int, omega: Iterable[int]) -> np.ndarray:
    """``|sum_{x in Omega} e(a x / p)|`` for a = 0, ..., p-1."""
    table = roots_of_unity(p)
    a = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.complex128)
    for x in sorted(set(int(v) % p for v in omega)):
        acc += table[(a * x) % p]
    return np.abs(acc)


def weyl_constant(p: int, omega: Iterable[int]) -> float:
    """``max_{a != 0} |sum_{x in Omega} e(a x/p)| / sqrt(p)``."""
    if p < 2:
        raise ValueError("p must be prime")
    return _weyl_cached(p, frozenset(int(v) % p for v in omega))


@lru_cache(maxsize=4096)
def _weyl_cached(p: int, omega: frozenset) -> float:
    return float(character_sum_magnitudes(p, omega)[1:].max()) / math.sqrt(p)


def weyl_constants(system: ResidueClassSystem) -> ResidueClassSystem:
    return replace(system, weyl={p: weyl_constant(p, v) for p, v in system.classes.items()})


# --------------------------------------------------------------------------
# Squares


def quadratic_residues(p: int) -> frozenset[int]:
    """Squares modulo an odd prime p, including 0."""
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be an odd prime, got {p}")
    return frozenset(x * x % p for x in range(p))


def nonresidues(p: int) -> frozenset[int]:
    return frozenset(range(p)) - quadratic_residues(p)


def _require_odd(q: SquarefreeModulus) -> None:
    if q.q % 2 == 0:
        raise EvenModulus(f"q = {q.q} is even")


def squares_system(q) -> ResidueClassSystem:
    """Forbid the non-residues mod each p; what remains are the squares mod q."""
    q = as_modulus(q)
    _require_odd(q)
    return ResidueClassSystem.build(q, {p: nonresidues(p) for p in q.primes})


@dataclass(frozen=True, eq=False)
class SquaresProfile:
    modulus: SquarefreeModulus
    member_sieve: np.ndarray

    @property
    def count(self) -> int:
        return math.prod((p + 1) // 2 for p in self.modulus.primes)

    @property
    def density_exact(self) -> Fraction:
        return math.prod((Fraction(p + 1, 2 * p) for p in self.modulus.primes), start=Fraction(1))

    @property
    def density_paper(self) -> Fraction:
        """``1 / (2^omega P)``, the centering in the literal inequality."""
        return 1 / (2 ** self.modulus.omega * self.modulus.P)

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.member_sieve)


def squares_profile(q, mem_budget: int = DEFAULT_MEM_BUDGET) -> SquaresProfile:
    q = as_modulus(q)
    _require_odd(q)
    if q.q > mem_budget:
        raise BudgetExceeded("sieve length q", q.q, mem_budget)
    n = np.arange(q.q, dtype=np.int64)
    member = np.ones(q.q, dtype=bool)
    for p in q.primes:
        is_sq = np.zeros(p, dtype=bool)
        is_sq[list(quadratic_residues(p))] = True
        member &= is_sq[n % p]
    member.setflags(write=False)
    return SquaresProfile(q, member)


def window_variance(mask: np.ndarray, h: int, center: Fraction) -> Fraction:
    """Exact ``sum_n (W(n) - h * center)^2`` over the cyclic windows of ``mask``."""
    center = Fraction(center)
    W = cyclic_window_counts(mask, h)
    num = centered_power_sum(W, center.denominator, h * center.numerator, 2)
    return Fraction(num, center.denominator ** 2)


def square_window_variance(profile: SquaresProfile, h: int, centering: str = "exact") -> Fraction:
    if centering == "exact":
        c = profile.density_exact
    elif centering == "paper":
        c = profile.density_paper
    else:
        raise ValueError("centering must be 'exact' or 'paper'")
    return window_variance(profile.member_sieve, h, c)


def square_variance_expsum(q, h: int) -> float:
    """The square-window variance (exact centering) from the k = 2 exponential
    sum with ``D_p`` the negated non-residues."""
    return variance_expsum(q, squares_system(q).offset_sets(), h)


def thm02_check(profile: SquaresProfile, h: int) -> BoundReport:
    """Both centerings of the square-window variance against ``q h/(2^omega P)``.

    ``observed`` is the exact-centering variance; the ``centering='paper'`` figures
    are in ``extras``.
    """
    q = profile.modulus
    rhs = q.q * h * profile.density_paper
    lhs_exact = square_window_variance(profile, h, "exact")
    lhs_paper = square_window_variance(profile, h, "paper")
    log_rhs = math.log(rhs.numerator) - math.log(rhs.denominator)
    return BoundReport(
        "thm02",
        {"q": q.q, "h": h, "omega": q.omega},
        log_rhs,
        float(lhs_exact),
        extras={
            "rhs": rhs,
            "lhs_exact": lhs_exact,
            "lhs_paper": lhs_paper,
            "ratio_paper": float(lhs_paper / rhs),
        },
    )


# --------------------------------------------------------------------------
# General systems


def thm41_check(system: ResidueClassSystem, h: int,
                mem_budget: int = DEFAULT_MEM_BUDGET) -> BoundReport:
    """Exact window variance of the allowed set against
    ``q h prod((1 - c_p)^2 + c'_p^2)``."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if not system.weyl:
        system = weyl_constants(system)
    q = system.modulus
    lhs = window_variance(system.allowed_mask(mem_budget), h, system.allowed_density)
    log_rhs = math.log(q.q * h) + math.fsum(
        math.log(float((1 - c) ** 2) + system.weyl[p] ** 2) for p, c in system.c.items()
    )
    return BoundReport("thm41", {"q": q.q, "h": h}, log_rhs, float(lhs), extras={"lhs": lhs})


def dstar_classes(p: int) -> frozenset[int]:
    """``{0, 2, 4, ..., p - 1}`` for odd p."""
    if p % 2 == 0:
        raise EvenModulus("D* needs odd primes")
    return frozenset(range(0, p, 2))


def dstar_system(q) -> ResidueClassSystem:
    """Forbid ``D*_p = {0, 2, ..., p-1}`` mod each p | q; the allowed density
    is ``prod (p-1)/(2p) = P / 2^omega``."""
    q = as_modulus(q)
    _require_odd(q)
    return ResidueClassSystem.build(q, {p: dstar_classes(p) for p in q.primes})


def dstar_factor(p: int, a: int) -> complex:
    """``sum_{s in D*_p} e(s a / p)``."""
    table = roots_of_unity(p)
    return complex(sum(table[(s * a) % p] for s in sorted(dstar_classes(p))))


# --------------------------------------------------------------------------
# Desk-scale lower bound for the D* system


def corollary1_primes(X: int) -> list[int]:
    """``floor(ln X)`` primes in (X, 2X): the closest pair first (smallest on
    ties), then the smallest remaining primes."""
    n = math.floor(math.log(X))
    ps = primes_in_range(X + 1, 2 * X)
    if n < 2 or len(ps) < n:
        raise InsufficientPrimes(f"need {n} >= 2 primes in ({X}, {2 * X}), found {len(ps)}")
    i = min(range(len(ps) - 1), key=lambda j: (ps[j + 1] - ps[j], j))
    pair = [ps[i], ps[i + 1]]
    if pair[1] - pair[0] > 2 * math.log(X):
        raise InsufficientPrimes(f"closest pair {pair} has gap > 2 ln X")
    rest = [p for p in ps if p not in pair][: n - 2]
    return sorted(pair + rest)


def corollary1_h_range(X: int, q: SquarefreeModulus) -> tuple[int, int]:
    """``(h_min, h_max)``: smallest h with expected allowed count >= 1 and the
    largest integer h < X^2 / ln X."""
    dens = q.P / 2 ** q.omega
    h_min = math.ceil(1 / dens)
    h_max = math.ceil(X * X / math.log(X)) - 1
    return h_min, h_max


def corollary1_h_grid(X: int, q: SquarefreeModulus, points: int = 12) -> list[int]:
    lo, hi = corollary1_h_range(X, q)
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(np.int64))
    return [int(h) for h in grid]


@dataclass(frozen=True)
class Corollary1Row:
    h: int
    statistic: Fraction
    scale: Fraction
    ratio: float


@dataclass(frozen=True)
class Corollary1Result:
    X: int
    primes: tuple[int, ...]
    q: int
    rows: tuple[Corollary1Row, ...]

    @property
    def min_ratio(self) -> float:
        return min(r.ratio for r in self.rows)


def corollary1_experiment(X: int, h=None, mem_budget: int = DEFAULT_MEM_BUDGET) -> Corollary1Result:
    """``sum_n (W(n) - h P/2^omega)^2`` for the D* system, relative to
    ``q (h P / 2^omega)^2``.

    ``h`` may be an int, a sequence of ints, ``None`` (the largest admissible
    h) or ``"grid"`` (a log grid over the admissible range).
    """
    if X < 10:
        raise ValueError("X must be >= 10")
    primes = corollary1_primes(X)
    q = SquarefreeModulus(math.prod(primes), tuple(primes))
    if q.q > mem_budget:
        raise BudgetExceeded("sieve length q", q.q, mem_budget)
    if h is None:
        hs = [corollary1_h_range(X, q)[1]]
    elif h == "grid":
        hs = corollary1_h_grid(X, q)
    elif isinstance(h, int):
        hs = [h]
    else:
        hs = [int(x) for x in h]
    system = dstar_system(q)
    dens = system.allowed_density
    assert dens == q.P / 2 ** q.omega
    mask = system.allowed_mask(mem_budget)
    rows = []
    for hv in hs:
        stat = window_variance(mask, hv, dens)
        scale = q.q * (hv * dens) ** 2
        rows.append(Corollary1Row(hv, stat, scale, float(stat / scale)))
    return Corollary1Result(X, tuple(primes), q.q, tuple(rows))


def random_system(q, rng: np.random.Generator, max_density: float = 0.5,
                  min_allowed_exponent: Optional[float] = None) -> ResidueClassSystem:
    """A random system with ``|Omega_p| <= max_density * p`` for every p | q.

    With ``min_allowed_exponent = e`` the size is further capped so that
    ``p - |Omega_p| > p^e``.
    """
    q = as_modulus(q)
    classes = {}
    for p in q.primes:
        cap = math.floor(max_density * p)
        if min_allowed_exponent is not None:
            cap = min(cap, p - math.floor(p ** min_allowed_exponent) - 1)
        size = int(rng.integers(0, max(cap, 0) + 1))
        classes[p] = rng.choice(p, size=size, replace=False).tolist()
    return ResidueClassSystem.build(q, classes)
