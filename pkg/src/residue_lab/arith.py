"""
Exact elementary number theory for squarefree moduli.

Everything here is deterministic and works on Python integers, so values
never overflow.  Densities are returned as :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import NonCoprimeModuli, NonInvertible, NotSquarefree


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization ``{p: exponent}``; ``factorize(1) == {}``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    # 6k +- 1 wheel
    d, step = 5, 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class SquarefreeModulus:
    """A squarefree modulus ``q`` together with its prime factorization.

    ``P`` is the exact density ``phi(q)/q`` of reduced residues.
    """

    q: int
    primes: tuple[int, ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if tuple(sorted(set(self.primes))) != tuple(self.primes):
            raise ValueError("primes must be strictly increasing")
        if math.prod(self.primes) != self.q:
            raise ValueError(f"product of {self.primes} is not {self.q}")

    @property
    def omega(self) -> int:
        return len(self.primes)

    @cached_property
    def phi(self) -> int:
        return math.prod(p - 1 for p in self.primes)

    @cached_property
    def P(self) -> Fraction:
        return Fraction(self.phi, self.q)

    @cached_property
    def divisors(self) -> tuple[int, ...]:
        """All divisors of q in increasing order."""
        divs = [1]
        for p in self.primes:
            divs += [d * p for d in divs]
        return tuple(sorted(divs))

    def sub(self, r: int) -> "SquarefreeModulus":
        """The modulus record of a divisor ``r`` of q."""
        if self.q % r:
            raise ValueError(f"{r} does not divide {self.q}")
        return SquarefreeModulus(r, tuple(p for p in self.primes if r % p == 0))

    def __int__(self):
        return self.q


def factor_squarefree(n: int) -> SquarefreeModulus:
    f = factorize(n)
    bad = [p for p, e in f.items() if e > 1]
    if bad:
        raise NotSquarefree(f"{n} is divisible by {bad[0]}^2")
    return SquarefreeModulus(n, tuple(sorted(f)))


def radical(n: int) -> SquarefreeModulus:
    primes = tuple(sorted(factorize(n)))
    return SquarefreeModulus(math.prod(primes), primes)


def as_modulus(q) -> SquarefreeModulus:
    """Accept either an int or a :class:`SquarefreeModulus`."""
    if isinstance(q, SquarefreeModulus):
        return q
    return factor_squarefree(int(q))


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def totient(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def mod_inverse(a: int, m: int) -> int:
    if m == 1:
        return 0
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NonInvertible(f"{a} is not invertible modulo {m}") from None


def crt_combine(pairs: Iterable[tuple[int, int]]) -> int:
    """Solve ``x = r_i (mod m_i)`` for pairwise coprime ``m_i``.

    Returns the unique solution in ``[0, prod m_i)``.
    """
    pairs = [(int(r), int(m)) for r, m in pairs]
    for (_, m1), (_, m2) in combinations(pairs, 2):
        if math.gcd(m1, m2) != 1:
            raise NonCoprimeModuli(f"moduli {m1} and {m2} share a factor")
    M = math.prod(m for _, m in pairs)
    x = 0
    for r, m in pairs:
        Mi = M // m
        x += r * Mi * mod_inverse(Mi % m, m)
    return x % M


def lcm(values: Sequence[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _small_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mark[p]:
            mark[p * p :: p] = False
    return np.flatnonzero(mark)


def primes_in_range(lo: int, hi: int, segment: int = 1 << 18) -> list[int]:
    """Primes p with ``lo <= p < hi``, by a segmented sieve of Eratosthenes."""
    lo = max(lo, 2)
    if hi <= lo:
        return []
    base = _small_primes(math.isqrt(hi - 1) + 1)
    out: list[int] = []
    for start in range(lo, hi, segment):
        stop = min(start + segment, hi)
        mark = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            mark[first - start :: p] = False
        out.extend(int(x) + start for x in np.flatnonzero(mark))
    return out


def primorial(n_primes: int) -> int:
    """Product of the first ``n_primes`` primes."""
    ps: list[int] = []
    bound = 16
    while len(ps) < n_primes:
        bound *= 2
        ps = primes_in_range(2, bound)
    return math.prod(ps[:n_primes])


def squarefree_upto(n: int, lo: int = 1) -> list[int]:
    """All squarefree integers in ``[lo, n]``."""
    mark = np.ones(n + 1, dtype=bool)
    mark[0] = False
    for p in _small_primes(math.isqrt(n)):
        mark[int(p) * int(p) :: int(p) * int(p)] = False
    return [int(x) for x in np.flatnonzero(mark) if x >= lo]
