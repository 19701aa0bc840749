import cmath
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from residue_lab.arith import as_modulus
from residue_lab.errors import BudgetExceeded, NonCoprime, ZeroDensity
from residue_lab.identities import (
    E_h,
    E_h_sq,
    F,
    FractionModOne,
    character_profile,
    constrained_product_sum,
    e,
    f_correlation,
    f_correlation_ratios,
    f_correlation_scan,
    kq_expansion,
    kq_expansion_all,
    kq_indicator,
    mu_D,
    product_expansion,
    product_expansion_all,
    representation_count,
    representation_histogram,
    singular_series_expsum,
)
from residue_lab.tuples import density, sieve_tuple_starts

from conftest import offset_sets, squarefree_q


def direct_E(x, h):
    return sum(cmath.exp(2j * math.pi * m * float(x)) for m in range(1, h + 1))


def test_e_exact_reduction():
    assert abs(e(1, 4) - 1j) < 1e-15
    assert abs(e(10 ** 30 + 1, 4) - 1j) < 1e-15
    assert abs(e(Fraction(7, 2)) + 1) < 1e-15


def test_fraction_mod_one():
    x = FractionModOne(-1, 6)
    assert (x.a, x.r) == (5, 6)
    assert FractionModOne(4, 6).reduce() == FractionModOne(2, 3)
    assert (FractionModOne(1, 2) + FractionModOne(1, 3)).value == Fraction(5, 6)
    assert FractionModOne(6, 3).reduce().a == 0


def test_kq_examples():
    assert kq_indicator(6, 5) == 1
    assert kq_indicator(6, 4) == 0
    assert kq_indicator(1, 0) == 1
    assert abs(kq_expansion(2, 1) - 1) < 1e-12
    assert abs(kq_expansion(15, 3)) < 1e-9
    assert abs(kq_expansion(6, 5) - 1) < 1e-9


@given(squarefree_q)
def test_kq_vector_matches_scalar(q):
    vals = kq_expansion_all(q)
    for m in {0, 1 % q, q // 2, q - 1}:
        assert abs(vals[m] - kq_expansion(q, m)) < 1e-9


def test_E_h_examples():
    assert E_h(0, 9) == 9
    assert abs(E_h(Fraction(1, 2), 3) + 1) < 1e-12
    assert abs(E_h(Fraction(2, 7), 7)) < 1e-12


@given(st.integers(0, 50), st.integers(1, 50), st.integers(1, 200))
def test_E_h_closed_form(a, r, h):
    x = Fraction(a, r)
    assert abs(E_h(x, h) - direct_E(x, h)) < 1e-9 * h
    assert abs(E_h(x, h)) <= float(F(x, h)) + 1e-9


@given(st.integers(2, 60), st.integers(1, 300))
def test_E_h_sq_vector(r, h):
    a = np.arange(1, r)
    got = E_h_sq(a, r, h)
    want = [abs(direct_E(Fraction(int(x), r), h)) ** 2 for x in a]
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_F_examples():
    assert F(0, 7) == 7
    assert F(Fraction(1, 2), 5) == 2
    assert F(Fraction(1, 3), 10) == 3


def test_mu_D_examples():
    assert mu_D([0], 2, 15) == 1
    assert abs(abs(mu_D([2, 3], 1, 5)) - (1 + math.sqrt(5)) / 2) < 1e-12
    m = abs(mu_D([0, 2, 4], 3, 5))
    assert abs(m - (1 + math.sqrt(5)) / 2) < 1e-12 and m >= 5 / math.pi
    with pytest.raises(NonCoprime):
        mu_D([0, 2], 3, 15)


@given(squarefree_q, offset_sets)
def test_mu_D_bound_and_multiplicativity(r, D):
    rm = as_modulus(r)
    prof = character_profile(D, rm)
    a = np.array([x for x in range(1, r + 1) if math.gcd(x, r) == 1])
    mags = np.abs(prof.mu(a))
    assert np.all(mags <= len(D) ** rm.omega + 1e-9)
    freq = prof.frequencies(a)
    prod = np.ones(len(a))
    for p in rm.primes:
        prod = prod * np.abs(prof.per_prime[p][freq[p]])
    np.testing.assert_allclose(mags, prod, atol=1e-9)
    x = int(a[-1])
    assert abs(mu_D(D, x, r) - prof.mu(np.array([x]))[0]) < 1e-9


def test_product_expansion_examples():
    assert abs(product_expansion(15, [0, 2], 11) - 1) < 1e-9
    assert abs(product_expansion(15, [0, 2], 3)) < 1e-9
    for m in range(30):
        assert abs(product_expansion(30, [0], m) - kq_expansion(30, m)) < 1e-9
    with pytest.raises(ZeroDensity):
        product_expansion(6, [0, 1], 1)


@given(squarefree_q, offset_sets)
def test_product_expansion_indicator(q, D):
    if density(q, D).phi_D == 0:
        return
    vals = product_expansion_all(q, D)
    ind = sieve_tuple_starts(q, D).indicator
    assert np.max(np.abs(vals - ind)) < 1e-9


def test_singular_series_examples():
    assert abs(singular_series_expsum(3, [0, 2]) - 0.75) < 1e-12
    assert abs(singular_series_expsum(15, [0, 2]) - 45 / 64) < 1e-8
    assert abs(singular_series_expsum(30, [0]) - 1) < 1e-9
    with pytest.raises(BudgetExceeded):
        singular_series_expsum(210, [0, 2, 6], budget=100)


@given(st.sampled_from([2, 3, 5, 6, 7, 10, 15, 21, 30]), offset_sets)
def test_singular_series_matches_product(q, D):
    if len(D) > 2:
        D = D[:2]
    assert abs(singular_series_expsum(q, D) - float(density(q, D).singular)) < 1e-8


def brute_representations(r_list, target):
    return sum(
        1 for a in product(*(range(1, r + 1) for r in r_list))
        if (sum(Fraction(x, r) for x, r in zip(a, r_list)) - target).denominator == 1
    )


def test_representation_examples():
    assert representation_count([2, 6], FractionModOne(1, 2)) == 2
    assert representation_count([2, 3], FractionModOne(5, 6)) == 1
    assert representation_count([3, 3], FractionModOne(2, 3)) == 3
    assert representation_count([2, 2], FractionModOne(1, 3)) == 0


@given(st.lists(st.sampled_from([1, 2, 3, 5, 6, 10, 15]), min_size=1, max_size=3))
def test_representation_histogram_brute(r_list):
    hist = representation_histogram(r_list)
    L = len(hist)
    for b in range(L):
        assert hist[b] == brute_representations(r_list, Fraction(b, L))
    expected = math.prod(r_list) // L
    assert set(hist.tolist()) <= {0, expected}


def test_f_correlation_examples():
    assert f_correlation(2, 1) == (1, Fraction(1, 2))
    assert f_correlation(3, 5) == (18, 2)
    total, _ = f_correlation(11, 1)
    assert total == 10


@given(st.integers(2, 80), st.integers(1, 120))
def test_f_correlation_vector_matches_exact(q, h):
    _, ratio = f_correlation(q, h)
    assert abs(f_correlation_ratios(q, [h])[0] - float(ratio)) < 1e-9


def test_f_correlation_scan_small():
    ratio, q, h = f_correlation_scan(30, 30)
    assert abs(ratio - float(f_correlation(q, h)[1])) < 1e-9
    assert all(float(f_correlation(x, y)[1]) <= ratio + 1e-12 for x in range(2, 31) for y in (1, 5, 30))


def test_constrained_sum_examples():
    assert constrained_product_sum([3, 3], 10, 4.0).lhs == 18
    assert constrained_product_sum([2, 2], 1, 4.0).lhs == 1
    assert constrained_product_sum([2, 3], 7, 4.0).lhs == 0
    assert constrained_product_sum([3, 3], 10, 4.0).holds
