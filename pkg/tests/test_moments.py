import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from residue_lab.arith import as_modulus
from residue_lab.errors import BudgetExceeded, PreconditionViolated
from residue_lab.moments import (
    BoundReport,
    binomial_moment,
    moment_direct,
    moment_expsum_k2,
    stirling2,
    theoretical_bound,
    y_split,
)
from residue_lab.tuples import density

from conftest import offset_sets, squarefree_q


def brute_moment(q, D, h, k):
    ok = [all(math.gcd(n + d, q) == 1 for d in D) for n in range(q)]
    center = h * density(q, D).P_D
    return sum(
        (sum(ok[(n + m) % q] for m in range(1, h + 1)) - center) ** k for n in range(q)
    )


def brute_binomial(h, P, k):
    mean = h * P
    return sum(
        math.comb(h, j) * P ** j * (1 - P) ** (h - j) * (j - mean) ** k for j in range(h + 1)
    )


def brute_stirling(r, t):
    """Surjections from an r-set onto a t-set, divided by t!."""
    if r == 0:
        return int(t == 0)
    return sum(1 for f in product(range(t), repeat=r) if len(set(f)) == t) // math.factorial(t)


def test_moment_examples():
    assert moment_direct(3, [0], 1, 2).value == Fraction(2, 3)
    assert moment_direct(15, [0, 2], 15, 4).value == 0
    assert moment_direct(15, [0, 2], 4, 2).value == Fraction(32, 5)


@given(st.sampled_from([1, 2, 3, 5, 6, 10, 15, 21, 30, 35]), offset_sets,
       st.integers(1, 40), st.integers(1, 5))
def test_moment_direct_brute(q, D, h, k):
    M = moment_direct(q, D, h, k)
    assert M.value == brute_moment(q, D, h, k)
    assert M.value == Fraction(M.scaled_numerator, q ** k)
    if k == 1:
        assert M.value == 0
    if k % 2 == 0:
        assert M.value >= 0


@given(squarefree_q, st.sampled_from([[0], [0, 2], [0, 2, 6]]), st.integers(1, 60))
def test_expsum_matches_direct(q, D, h):
    if density(q, D).phi_D == 0:
        return
    direct = moment_direct(q, D, h, 2).float_value
    assert math.isclose(moment_expsum_k2(q, D, h), direct, rel_tol=1e-6, abs_tol=1e-9)


def test_expsum_examples():
    assert math.isclose(moment_expsum_k2(3, [0], 1), 2 / 3, rel_tol=1e-12)
    assert abs(moment_expsum_k2(30, [0, 2], 30)) < 1e-9
    with pytest.raises(BudgetExceeded):
        moment_expsum_k2(30030, [0], 3, budget=10)


def test_moment_k_range():
    with pytest.raises(ValueError):
        moment_direct(15, [0], 3, 9)


@pytest.mark.parametrize("r", range(0, 7))
def test_stirling_brute(r):
    for t in range(0, r + 1):
        assert stirling2(r, t) == brute_stirling(r, t)


def test_stirling_examples():
    assert stirling2(3, 2) == 3
    assert stirling2(9, 1) == 1
    assert stirling2(4, 0) == 0
    assert stirling2(0, 0) == 1


def test_binomial_examples():
    assert binomial_moment(4, Fraction(1, 2), 2) == 1
    assert binomial_moment(3, Fraction(1, 3), 3) == Fraction(2, 9)
    assert binomial_moment(7, Fraction(2, 5), 1) == 0


@given(st.integers(0, 10), st.fractions(0, 1, max_denominator=12), st.integers(0, 6))
def test_binomial_brute(h, P, k):
    assert binomial_moment(h, P, k) == brute_binomial(h, P, k)


def test_bound_examples():
    r = theoretical_bound("lemma12", q=30, h=10, k=2, s=1)
    assert math.isclose(r.bound_value, 4218.75, rel_tol=1e-12)
    r = theoretical_bound("lemma21", q=30, h=10, k=2, s=1)
    assert math.isclose(r.bound_value, 160, rel_tol=1e-12)
    r = theoretical_bound("mv_mu_k", observed=binomial_moment(4, Fraction(1, 2), 2),
                          h=4, P=Fraction(1, 2), k=2)
    assert math.isclose(r.bound_value, 4, rel_tol=1e-12)
    assert math.isclose(r.ratio, 0.25)


def test_thm42_formulas():
    P = Fraction(4, 15)
    r = theoretical_bound("thm42_general", q=30, h=10, k=4, s=2)
    assert math.isclose(r.bound_value, 30 * 10 ** 2 * float(P) ** (8 - 8), rel_tol=1e-12)
    small = theoretical_bound("thm42_small_h", q=30, h=1, k=2, s=1)
    assert math.isclose(small.bound_value, 30 * float(P), rel_tol=1e-12)


def test_bound_preconditions():
    with pytest.raises(PreconditionViolated):
        theoretical_bound("lemma21", q=30, h=10, k=3, s=1)
    with pytest.raises(PreconditionViolated):
        theoretical_bound("lemma31", q=30, h=2, k=2, s=1)
    with pytest.raises(PreconditionViolated):
        theoretical_bound("thm42_small_h", q=30, h=50, k=2, s=1)
    with pytest.raises(PreconditionViolated):
        theoretical_bound("lemma31", q=30, h=10, k=2, s=1, A=2)


def test_lemma31_split():
    r = theoretical_bound("lemma31", q=30030, h=10, k=2, s=1)
    assert r.inputs["y"] == 101
    assert r.inputs["q1"] * r.inputs["q2"] == 30030
    q1, q2 = y_split(as_modulus(30030), 5)
    assert (q1.q, q2.q) == (30, 1001)
    assert r.bound_value > theoretical_bound("lemma21", q=30030, h=10, k=2, s=1).bound_value


def test_huge_bound_stays_in_log_space():
    r = theoretical_bound("lemma12", observed=1.0, q=30030, h=100, k=8, s=2)
    assert r.bound_value == math.inf
    assert 0 < r.ratio < 1e-300 or r.ratio == 0.0
    assert BoundReport("x", {}, 0.0, 0).ratio == 0.0
