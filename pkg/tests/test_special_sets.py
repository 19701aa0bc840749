import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from residue_lab.arith import as_modulus, primes_in_range
from residue_lab.errors import EvenModulus
from residue_lab.moments import moment_direct, variance_expsum
from residue_lab.special_sets import (
    ResidueClassSystem,
    corollary1_experiment,
    corollary1_h_range,
    corollary1_primes,
    dstar_classes,
    dstar_factor,
    dstar_system,
    induced_offset_set,
    nonresidues,
    quadratic_residues,
    random_system,
    square_variance_expsum,
    square_window_variance,
    squares_profile,
    squares_system,
    system_from_offsets,
    thm02_check,
    thm41_check,
    weyl_constant,
    weyl_constants,
    window_variance,
)

from conftest import odd_squarefree_q, squarefree_q


def brute_variance(allowed, q, h, center):
    return sum(
        (sum(allowed[(n + m) % q] for m in range(1, h + 1)) - h * center) ** 2 for n in range(q)
    )


def test_quadratic_residues():
    assert quadratic_residues(5) == {0, 1, 4}
    assert quadratic_residues(3) == {0, 1}
    assert quadratic_residues(7) == {0, 1, 2, 4}
    assert nonresidues(7) == {3, 5, 6}
    with pytest.raises(ValueError):
        quadratic_residues(2)


def test_squares_profile_q15():
    prof = squares_profile(15)
    assert prof.members().tolist() == [0, 1, 4, 6, 9, 10]
    assert prof.count == 6
    assert prof.density_exact == Fraction(2, 5)
    assert prof.density_paper == Fraction(15, 32)
    assert squares_profile(3).members().tolist() == [0, 1]
    with pytest.raises(EvenModulus):
        squares_profile(30)


@given(odd_squarefree_q)
def test_squares_members_brute(q):
    sq = sorted({x * x % q for x in range(q)})
    assert squares_profile(q).members().tolist() == sq


def test_square_variance_examples():
    prof = squares_profile(15)
    assert square_window_variance(prof, 15, "exact") == 0
    assert square_window_variance(prof, 15, "paper") == Fraction(16335, 1024)
    assert math.isclose(float(square_window_variance(prof, 4)), square_variance_expsum(15, 4),
                        rel_tol=1e-6)


@given(st.sampled_from([3, 5, 7, 15, 21, 35, 105]), st.integers(1, 40))
def test_square_variance_expsum(q, h):
    prof = squares_profile(q)
    exact = square_window_variance(prof, h)
    assert math.isclose(float(exact), square_variance_expsum(q, h), rel_tol=1e-6, abs_tol=1e-9)
    member = [x in set(prof.members().tolist()) for x in range(q)]
    assert exact == brute_variance(member, q, h, prof.density_exact)


def test_thm02_examples():
    prof = squares_profile(15)
    r = thm02_check(prof, 4)
    assert r.extras["rhs"] == Fraction(225, 8)
    assert math.isclose(r.bound_value, 28.125)
    assert thm02_check(prof, 15).ratio == 0
    assert any(thm02_check(prof, h).extras["ratio_paper"] > 1 for h in range(1, 400))


def test_weyl_examples():
    assert math.isclose(weyl_constant(5, {0, 1, 4}), (1 + 2 * math.cos(2 * math.pi / 5)) / math.sqrt(5))
    assert weyl_constant(7, range(7)) < 1e-12
    assert math.isclose(weyl_constant(11, {0}), 1 / math.sqrt(11))
    assert weyl_constant(11, set()) == 0


@given(st.sampled_from(primes_in_range(2, 60)), st.data())
def test_weyl_brute(p, data):
    omega = data.draw(st.sets(st.integers(0, p - 1)))
    brute = max(
        (abs(sum(cmath.exp(2j * math.pi * a * x / p) for x in omega)) for a in range(1, p)),
        default=0.0,
    ) / math.sqrt(p)
    assert abs(weyl_constant(p, omega) - brute) < 1e-9


def test_thm41_hand_case():
    system = ResidueClassSystem.build(3, {3: [0]})
    r = thm41_check(system, 1)
    assert r.extras["lhs"] == Fraction(2, 3)
    assert math.isclose(r.bound_value, 7 / 3)
    assert math.isclose(r.ratio, 2 / 7)
    assert thm41_check(system, 3).extras["lhs"] == 0


def test_thm41_squares_agree():
    prof = squares_profile(15)
    neg_nr = ResidueClassSystem.build(15, {p: {(-x) % p for x in nonresidues(p)} for p in (3, 5)})
    for h in (1, 4, 9):
        exact = square_window_variance(prof, h)
        assert thm41_check(squares_system(15), h).extras["lhs"] == exact
        assert thm41_check(neg_nr, h).extras["lhs"] == exact


@given(squarefree_q, st.integers(1, 60), st.integers(0, 2 ** 32 - 1))
def test_thm41_random_systems(q, h, seed):
    system = random_system(q, np.random.default_rng(seed))
    r = thm41_check(system, h)
    mask = system.allowed_mask()
    assert r.extras["lhs"] == brute_variance(mask.tolist(), q, h, system.allowed_density)
    assert r.ratio <= 1 + 1e-12
    offsets_var = variance_expsum(q, system.offset_sets(), h) if system.allowed_count else 0.0
    assert math.isclose(float(r.extras["lhs"]), offsets_var, rel_tol=1e-6, abs_tol=1e-6)


def test_system_json_roundtrip(tmp_path):
    doc = {"primes": [3, 7], "classes": {"3": [0], "7": [1, 2, 4]}}
    system = ResidueClassSystem.from_json(doc)
    assert system.modulus.q == 21
    assert system.allowed_density == Fraction(2, 3) * Fraction(4, 7)
    path = tmp_path / "s.json"
    path.write_text(__import__("json").dumps(system.to_json()))
    assert ResidueClassSystem.load(path).classes == system.classes
    with pytest.raises(ValueError):
        ResidueClassSystem.build(15, {3: [0, 1, 2], 5: [0]})


def test_induced_offsets_moment():
    system = system_from_offsets(35, [0, 2])
    D = induced_offset_set(system)
    for h in (1, 5, 12):
        assert moment_direct(35, D, h, 2).value == thm41_check(system, h).extras["lhs"]
        assert moment_direct(35, [0, 2], h, 2).value == thm41_check(system, h).extras["lhs"]


def test_dstar():
    assert dstar_classes(5) == {0, 2, 4}
    system = dstar_system(15)
    assert np.flatnonzero(system.covered_mask()).tolist() == [0, 2, 5, 9, 12, 14]
    q = as_modulus(15)
    assert system.allowed_density == Fraction(2, 15) == q.P / 2 ** q.omega


def test_dstar_factor_lower_bound():
    for p in primes_in_range(3, 200):
        for a in {(p - 1) // 2, (p + 1) // 2}:
            assert abs(dstar_factor(p, a)) >= p / math.pi


def test_corollary1_primes():
    assert corollary1_primes(20) == [29, 31]
    assert corollary1_primes(50) == [53, 59, 61]
    with pytest.raises(ValueError):
        corollary1_experiment(5)


def test_corollary1_small():
    res = corollary1_experiment(20, h=[5, 899])
    assert res.q == 899
    assert res.rows[1].statistic == 0
    lo, hi = corollary1_h_range(20, as_modulus(899))
    assert lo <= hi < 899
    grid = corollary1_experiment(20, "grid")
    assert all(lo <= r.h <= hi for r in grid.rows)
    assert grid.min_ratio > 0
