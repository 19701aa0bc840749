"""
Exponential sums attached to tuples of reduced residues.

``e(x) = exp(2 pi i x)`` is always evaluated after reducing the argument
mod 1 in exact arithmetic, so large numerators do not lose precision.
Sums of complex terms go through :func:`csum` (``math.fsum`` per
component), which is correctly rounded and order independent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .arith import SquarefreeModulus, as_modulus, lcm, moebius, mod_inverse, totient
from .errors import BudgetExceeded, NonCoprime, ZeroDensity
from .tuples import OffsetSet, as_offsets, phi_D

DEFAULT_TERM_BUDGET = 5_000_000


def tolerance(n_terms: int) -> float:
    """Absolute tolerance for an identity accumulated over ``n_terms`` terms."""
    return 1e-12 * n_terms + 1e-9


def csum(values: Iterable[complex]) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def e(num, den: int = 1) -> complex:
    """``exp(2 pi i num/den)``.

    ``num`` may be an int, a Fraction or a float.  Rational arguments are
    reduced to ``[0, 1)`` exactly before the conversion to floating point.
    """
    if isinstance(num, float):
        x = num / den
        x -= math.floor(x)
    else:
        x = Fraction(num, den)
        x = Fraction(x.numerator % x.denominator, x.denominator)
    return cmath.exp(2j * math.pi * float(x))


@lru_cache(maxsize=4096)
def roots_of_unity(r: int) -> np.ndarray:
    """``e(k/r)`` for k in [0, r)."""
    k = np.arange(r, dtype=np.float64)
    out = np.exp(2j * np.pi * k / r)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4096)
def coprime_residues(r: int) -> np.ndarray:
    """``a`` in ``(0, r]`` with gcd(a, r) = 1 (so r = 1 gives [1])."""
    a = np.arange(1, r + 1, dtype=np.int64)
    out = a[np.gcd(a, r) == 1]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FractionModOne:
    """The class of ``a/r`` in R/Z, kept with its stated denominator."""

    a: int
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "a", self.a % self.r)

    @property
    def value(self) -> Fraction:
        return Fraction(self.a, self.r)

    def reduce(self) -> "FractionModOne":
        g = math.gcd(self.a, self.r)
        if self.a == 0:
            return FractionModOne(0, 1)
        return FractionModOne(self.a // g, self.r // g)

    def __add__(self, other: "FractionModOne") -> "FractionModOne":
        d = lcm([self.r, other.r])
        return FractionModOne(self.a * (d // self.r) + other.a * (d // other.r), d)


# --------------------------------------------------------------------------
# k_q and its Ramanujan-sum expansion


def kq_indicator(q, m: int) -> int:
    q = as_modulus(q)
    return 1 if math.gcd(m % q.q, q.q) == 1 else 0


def _kq_terms(q: SquarefreeModulus, m: int) -> list[complex]:
    terms = []
    for r in q.divisors:
        a = coprime_residues(r)
        ram = roots_of_unity(r)[(m * a) % r]
        w = moebius(r) / totient(r)
        terms.extend(w * ram)
    return terms


def kq_expansion(q, m: int) -> complex:
    """``P sum_{r|q} mu(r)/phi(r) sum_{(a,r)=1} e(ma/r)``."""
    q = as_modulus(q)
    return float(q.P) * csum(_kq_terms(q, m))


def kq_expansion_all(q) -> np.ndarray:
    """:func:`kq_expansion` for every m in [0, q), vectorised over m."""
    q = as_modulus(q)
    m = np.arange(q.q, dtype=np.int64)
    total = np.zeros(q.q, dtype=np.complex128)
    for r in q.divisors:
        a = coprime_residues(r)
        ram = roots_of_unity(r)[np.outer(m % r, a) % r].sum(axis=1)
        total += moebius(r) / totient(r) * ram
    return float(q.P) * total


# --------------------------------------------------------------------------
# E_h and F


def _mod_one(x):
    if isinstance(x, float):
        return x - math.floor(x)
    x = Fraction(x)
    return x - math.floor(x)


def E_h(x, h: int) -> complex:
    """``sum_{m=1}^{h} e(m x)`` via the geometric closed form."""
    if h < 1:
        raise ValueError("h must be >= 1")
    x = _mod_one(x)
    if x == 0:
        return complex(h)
    ex, ehx = e(x), e(h * x)
    return ex * (ehx - 1) / (ex - 1)


def E_h_sq(a, r: int, h: int) -> np.ndarray:
    """``|E_h(a/r)|^2`` for integer arrays ``a``, as ``sin^2(pi h a/r)/sin^2(pi a/r)``.

    Both sines are taken of exactly reduced arguments.
    """
    a = np.asarray(a, dtype=np.int64) % r
    out = np.full(a.shape, float(h) ** 2)
    nz = a != 0
    num = np.sin(np.pi * ((h * a[nz]) % r) / r)
    den = np.sin(np.pi * a[nz] / r)
    out[nz] = (num / den) ** 2
    return out


def dist_to_int(x):
    x = _mod_one(x)
    return min(x, 1 - x)


def F(x, h: int):
    """``min(h, 1/||x||)`` with ``F(0) = h``; exact for rational input."""
    d = dist_to_int(x)
    if d == 0:
        return h if not isinstance(d, float) else float(h)
    inv = 1 / d
    return min(Fraction(h), inv) if isinstance(d, Fraction) else min(float(h), inv)


# --------------------------------------------------------------------------
# mu_D(a, r)


def residue_sets(D, primes: Iterable[int]) -> dict[int, frozenset[int]]:
    """Per-prime sets ``D_p`` from an offset set, or pass a mapping through."""
    if isinstance(D, Mapping):
        return {p: frozenset(int(x) % p for x in D[p]) for p in primes}
    D = as_offsets(D)
    return {p: D.residues(p) for p in primes}


def _prime_factor_sum(Dp: Iterable[int], b, p: int):
    """``sum_{s in D_p} e(s b / p)`` for scalar or array ``b``."""
    table = roots_of_unity(p)
    b = np.asarray(b, dtype=np.int64)
    acc = np.zeros(b.shape, dtype=np.complex128)
    for s in sorted(Dp):
        acc = acc + table[(s * b) % p]
    return acc


def mu_D(D, a: int, r) -> complex:
    """``prod_{p|r} sum_{s in D_p} e(s a (r/p)^{-1}_p / p)``.

    ``D`` is an offset set or a mapping ``p -> D_p``.
    """
    r = as_modulus(r)
    if math.gcd(a, r.q) != 1:
        raise NonCoprime(f"gcd({a}, {r.q}) != 1")
    sets = residue_sets(D, r.primes)
    val = complex(1)
    for p in r.primes:
        b = (a * mod_inverse((r.q // p) % p, p)) % p
        val *= complex(_prime_factor_sum(sets[p], b, p))
    return val


@dataclass(frozen=True, eq=False)
class CharacterSumProfile:
    """Per-prime character sums for one squarefree denominator r.

    ``per_prime[p][b]`` is ``sum_{s in D_p} e(s b / p)``; ``mu(a)`` assembles
    ``mu_D(a, r)`` from them.
    """

    r: SquarefreeModulus
    per_prime: dict[int, np.ndarray]
    s: int
    magnitude_bound: str = "s**omega(r)"

    def frequencies(self, a) -> dict[int, np.ndarray]:
        a = np.asarray(a, dtype=np.int64)
        return {p: (a * mod_inverse((self.r.q // p) % p, p)) % p for p in self.r.primes}

    def mu(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        out = np.ones(a.shape, dtype=np.complex128)
        for p, b in self.frequencies(a).items():
            out = out * self.per_prime[p][b]
        return out

    def bound(self) -> float:
        return float(self.s ** self.r.omega)


def character_profile(D, r) -> CharacterSumProfile:
    r = as_modulus(r)
    sets = residue_sets(D, r.primes)
    per_prime = {p: _prime_factor_sum(sets[p], np.arange(p), p) for p in r.primes}
    s = max((len(v) for v in sets.values()), default=1)
    if not isinstance(D, Mapping):
        s = as_offsets(D).s
    return CharacterSumProfile(r, per_prime, s)


# --------------------------------------------------------------------------
# Product expansion of k_q(m + h_1) ... k_q(m + h_s)


def _phi_from_sets(r: SquarefreeModulus, sets: Mapping[int, frozenset]) -> int:
    return math.prod(p - len(sets[p]) for p in r.primes)


@lru_cache(maxsize=256)
def _expansion_table(q: SquarefreeModulus, key: tuple):
    """For every r | q: (weight mu(r)/phi_D(r), coprime a's, mu_D values)."""
    sets = {p: frozenset(v) for p, v in key}
    phi_q = _phi_from_sets(q, sets)
    if phi_q == 0:
        raise ZeroDensity(f"phi_D({q.q}) = 0")
    rows = []
    for r in q.divisors:
        rm = q.sub(r)
        prof = character_profile(sets, rm)
        a = coprime_residues(r)
        rows.append((r, moebius(r) / _phi_from_sets(rm, sets), a, prof.mu(a)))
    return Fraction(phi_q, q.q), rows


def _sets_key(D, q: SquarefreeModulus) -> tuple:
    sets = residue_sets(D, q.primes)
    return tuple((p, tuple(sorted(sets[p]))) for p in q.primes)


def product_expansion(q, D, m: int) -> complex:
    """``P_D sum_{r|q} mu(r)/phi_D(r) sum_{(a,r)=1} e(ma/r) mu_D(a,r)``."""
    q = as_modulus(q)
    P_D, rows = _expansion_table(q, _sets_key(D, q))
    terms = []
    for r, w, a, mu in rows:
        terms.extend(w * roots_of_unity(r)[(m * a) % r] * mu)
    return float(P_D) * csum(terms)


def product_expansion_all(q, D) -> np.ndarray:
    """:func:`product_expansion` for every m in [0, q)."""
    q = as_modulus(q)
    P_D, rows = _expansion_table(q, _sets_key(D, q))
    m = np.arange(q.q, dtype=np.int64)
    total = np.zeros(q.q, dtype=np.complex128)
    for r, w, a, mu in rows:
        total += w * (roots_of_unity(r)[np.outer(m % r, a) % r] @ mu)
    return float(P_D) * total


def product_indicator(q, D, m: int) -> int:
    return math.prod(kq_indicator(q, m + h) for h in as_offsets(D))


# --------------------------------------------------------------------------
# Singular series as an exponential sum


def singular_series_expsum(q, D, budget: int = DEFAULT_TERM_BUDGET) -> complex:
    """Singular-series sum

    ``sum_{r_1..r_s | q} prod mu(r_i)/phi(r_i)
      sum_{sum a_i/r_i in Z} e(sum h_i a_i / r_i)``

    The last numerator is solved from the integrality constraint, so the
    enumeration runs over ``s - 1`` free numerators per divisor tuple.
    """
    q, D = as_modulus(q), as_offsets(D)
    divs = q.divisors
    cost = len(divs) * sum(totient(r) for r in divs) ** max(D.s - 1, 0)
    if cost > budget:
        raise BudgetExceeded("singular series terms", cost, budget)
    h = D.offsets
    terms = []
    for rs in product(divs, repeat=D.s):
        w = math.prod(moebius(r) / totient(r) for r in rs)
        if w == 0:
            continue
        *head, r_last = rs
        for a_head in product(*(coprime_residues(r).tolist() for r in head)):
            partial = sum((Fraction(a, r) for a, r in zip(a_head, head)), Fraction(0))
            # a_last / r_last = -partial (mod 1)
            need = -partial * r_last
            if need.denominator != 1:
                continue
            a_last = int(need) % r_last or r_last
            if math.gcd(a_last, r_last) != 1:
                continue
            phase = sum(
                (Fraction(hi * ai, ri) for hi, ai, ri in zip(h, (*a_head, a_last), rs)),
                Fraction(0),
            )
            terms.append(w * e(phase))
    return csum(terms)


# --------------------------------------------------------------------------
# Representation counting


def representation_count(r_list: Sequence[int], target: FractionModOne,
                         budget: int = DEFAULT_TERM_BUDGET) -> int:
    """Number of ``(a_1..a_s)``, ``0 < a_i <= r_i``, with
    ``sum a_i/r_i = target (mod 1)``."""
    r_list = [int(r) for r in r_list]
    *head, r_last = r_list
    cost = math.prod(head)
    if cost > budget:
        raise BudgetExceeded("representation enumeration", cost, budget)
    t = target.value
    count = 0
    for a_head in product(*(range(1, r + 1) for r in head)):
        rest = t - sum((Fraction(a, r) for a, r in zip(a_head, head)), Fraction(0))
        if (rest * r_last).denominator == 1:
            count += 1
    return count


def representation_histogram(r_list: Sequence[int]) -> np.ndarray:
    """Counts of every class ``b / L`` (L = lcm) hit by ``sum a_i/r_i``.

    Index b of the returned array is the number of tuples landing on b/L.
    """
    L = lcm(r_list)
    hist = np.zeros(L, dtype=np.int64)
    hist[0] = 1
    x = np.arange(L, dtype=np.int64)
    for r in r_list:
        steps = np.arange(1, r + 1, dtype=np.int64) * (L // r)
        hist = hist[(x[:, None] - steps[None, :]) % L].sum(axis=1)
    return hist


# --------------------------------------------------------------------------
# F-correlation and the bilinear bound


def f_correlation(q: int, h: int) -> tuple[Fraction, Fraction]:
    """Exact ``sum_{0<a<q} F(a/q)^2`` and its ratio to ``q min(q, h)``."""
    if q < 2:
        raise ValueError("q must be >= 2")
    total = Fraction(0)
    for a in range(1, q):
        total += F(Fraction(a, q), h) ** 2
    return total, total / (q * min(q, h))


def f_correlation_ratios(q: int, h_values: np.ndarray) -> np.ndarray:
    """Floating ratios ``f_correlation(q, h)[1]`` for many h at once."""
    m = np.minimum(np.arange(1, q), q - np.arange(1, q))
    v = np.sort((q / m.astype(np.float64)) ** 2)
    csum_v = np.concatenate([[0.0], np.cumsum(v)])
    h = np.asarray(h_values, dtype=np.float64)
    k = np.searchsorted(v, h * h, side="left")  # terms strictly below h^2
    total = csum_v[k] + (len(v) - k) * h * h
    return total / (q * np.minimum(q, h))


def f_correlation_scan(qmax: int, hmax: int) -> tuple[float, int, int]:
    """Largest ``f_correlation`` ratio over 2 <= q <= qmax, 1 <= h <= hmax.

    Returns ``(ratio, q, h)`` at the maximiser (first one in scan order).
    """
    hs = np.arange(1, hmax + 1)
    best = (-1.0, 0, 0)
    for q in range(2, qmax + 1):
        ratios = f_correlation_ratios(q, hs)
        i = int(np.argmax(ratios))
        if ratios[i] > best[0] + 1e-12:
            best = (float(ratios[i]), q, int(hs[i]))
    return best


@dataclass(frozen=True)
class ConstrainedSum:
    lhs: Fraction
    rhs: float
    C_F: float
    holds: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "holds", float(self.lhs) <= self.rhs * (1 + 1e-12))


def constrained_product_sum(q_list: Sequence[int], h: int, C_F: float,
                            budget: int = DEFAULT_TERM_BUDGET) -> ConstrainedSum:
    """Exact ``sum_{0<a_i<q_i, sum a_i/q_i in Z} prod F(a_i/q_i)`` against
    ``(1/d) prod q_i G_0(q_i)^{1/2}`` with ``G_0(q) = C_F min(q, h)``."""
    q_list = [int(x) for x in q_list]
    if any(x < 2 for x in q_list):
        raise ValueError("every q_i must exceed 1")
    *head, q_last = q_list
    cost = math.prod(x - 1 for x in head)
    if cost > budget:
        raise BudgetExceeded("constrained tuples", cost, budget)
    lhs = Fraction(0)
    for a_head in product(*(range(1, x) for x in head)):
        partial = sum((Fraction(a, x) for a, x in zip(a_head, head)), Fraction(0))
        need = -partial * q_last
        if need.denominator != 1:
            continue
        a_last = int(need) % q_last
        if a_last == 0:
            continue
        term = F(Fraction(a_last, q_last), h)
        for a, x in zip(a_head, head):
            term *= F(Fraction(a, x), h)
        lhs += term
    d = lcm(q_list)
    rhs = math.prod(x * math.sqrt(C_F * min(x, h)) for x in q_list) / d
    return ConstrainedSum(lhs, rhs, C_F)
