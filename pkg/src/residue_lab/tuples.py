"""Offset sets, tuple densities and the full-period tuple-start sieve."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .arith import SquarefreeModulus, as_modulus, primes_in_range
from .errors import BudgetExceeded

#: default sieve cap, in bits of indicator
DEFAULT_MEM_BUDGET = 1 << 31


@dataclass(frozen=True)
class OffsetSet:
    """A set ``D = {h_1 < ... < h_s}`` of integer offsets."""

    offsets: tuple[int, ...]

    def __init__(self, offsets: Iterable[int]):
        vals = [int(h) for h in offsets]
        if not vals:
            raise ValueError("an offset set needs at least one element")
        if len(set(vals)) != len(vals):
            raise ValueError(f"offsets must be distinct: {vals}")
        object.__setattr__(self, "offsets", tuple(sorted(vals)))

    @classmethod
    def parse(cls, text: str) -> "OffsetSet":
        """Parse ``"0,2,6"`` (CLI form) or ``"[0, 2, 6]"`` (JSON form)."""
        text = text.strip()
        if text.startswith("["):
            return cls(json.loads(text))
        return cls(int(tok) for tok in text.split(",") if tok.strip())

    @property
    def s(self) -> int:
        return len(self.offsets)

    @property
    def span(self) -> int:
        return self.offsets[-1] - self.offsets[0]

    def residues(self, p: int) -> frozenset[int]:
        """``D_p``: the offsets reduced into ``[0, p)``."""
        return frozenset(h % p for h in self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def __len__(self):
        return len(self.offsets)

    def __str__(self):
        return ",".join(map(str, self.offsets))


def as_offsets(D) -> OffsetSet:
    return D if isinstance(D, OffsetSet) else OffsetSet(D)


def nu_p(D, p: int) -> int:
    return len(as_offsets(D).residues(p))


def is_admissible(D, q=None) -> bool:
    """Admissibility of D, either for all primes (``q=None``) or for p | q."""
    D = as_offsets(D)
    if q is None:
        primes = primes_in_range(2, D.s + 1)
    else:
        primes = as_modulus(q).primes
    return all(nu_p(D, p) < p for p in primes)


@dataclass(frozen=True)
class TupleDensity:
    phi_D: int
    P_D: Fraction
    singular: Fraction
    P_pow_s: Fraction


def phi_D(q, D) -> int:
    q, D = as_modulus(q), as_offsets(D)
    return math.prod(p - nu_p(D, p) for p in q.primes)


def density(q, D) -> TupleDensity:
    q, D = as_modulus(q), as_offsets(D)
    singular = Fraction(1)
    for p in q.primes:
        singular *= Fraction(p, p - 1) ** D.s * Fraction(p - nu_p(D, p), p)
    pd = phi_D(q, D)
    return TupleDensity(
        phi_D=pd,
        P_D=Fraction(pd, q.q),
        singular=singular,
        P_pow_s=q.P ** D.s,
    )


def allowed_mask(q: SquarefreeModulus, forbidden: dict[int, Iterable[int]],
                 mem_budget: int = DEFAULT_MEM_BUDGET) -> np.ndarray:
    """Boolean array over ``[0, q)``: n is set iff ``n mod p`` avoids
    ``forbidden[p]`` for every p | q."""
    if q.q > mem_budget:
        raise BudgetExceeded("sieve length q", q.q, mem_budget)
    mask = np.ones(q.q, dtype=bool)
    for p in q.primes:
        for c in set(int(x) % p for x in forbidden.get(p, ())):
            mask[c::p] = False
    return mask


@dataclass(frozen=True, eq=False)
class TupleStartSieve:
    """Indicator over one period: bit n is ``prod_i k_q(n + h_i)``."""

    q: SquarefreeModulus
    indicator: np.ndarray

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.indicator))

    def starts(self) -> np.ndarray:
        return np.flatnonzero(self.indicator)


def sieve_tuple_starts(q, D, mem_budget: int = DEFAULT_MEM_BUDGET) -> TupleStartSieve:
    q, D = as_modulus(q), as_offsets(D)
    # n + h = 0 (mod p)  <=>  n = -h (mod p)
    forbidden = {p: [-h for h in D.residues(p)] for p in q.primes}
    ind = allowed_mask(q, forbidden, mem_budget)
    ind.setflags(write=False)
    return TupleStartSieve(q, ind)


def cyclic_window_counts(indicator: np.ndarray, h: int) -> np.ndarray:
    """``W(n) = sum_{m=1}^{h} t((n + m) mod q)`` for n in [0, q).

    Windows wrap around the period; h may exceed q.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    q = indicator.shape[0]
    total = int(np.count_nonzero(indicator))
    prefix = np.zeros(q + 1, dtype=np.int64)
    np.cumsum(indicator, out=prefix[1:])

    def upto(x):
        # number of set positions in [0, x) of the periodic extension
        full, rem = np.divmod(x, q)
        return full * total + prefix[rem]

    n = np.arange(q, dtype=np.int64)
    return upto(n + h + 1) - upto(n + 1)


def window_counts(sieve: TupleStartSieve, h: int) -> np.ndarray:
    return cyclic_window_counts(sieve.indicator, h)
