from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ietcocycle import TwistParameter, parse_permutation, rauzy_step, zorich_orbit, zorich_step
from ietcocycle._exact import determinant, mat_mul
from ietcocycle.combinatorics import all_rauzy_classes
from ietcocycle.errors import NonPositiveEntry, StepCapExceeded, TieBreakUndefined
from ietcocycle.renorm import (BitStream, SimplexSampler, col, heights, path_product, step_kind,
                               toral_zorich_step)

import oracles
from conftest import iet_params

ROT = parse_permutation("AB/BA")
R3, R7 = Fraction("0.3"), Fraction("0.7")


def row_times(lam, B):
    d = len(lam)
    return [sum(lam[i] * B[i][j] for i in range(d)) for j in range(d)]


def test_rauzy_step_top_example():
    st_ = rauzy_step([R3, R7], ROT)
    assert st_.kind == "top"
    assert [Fraction(x, 10) for x in st_.next_lambda] == [R3, Fraction("0.4")]
    assert [list(r) for r in st_.matrix] == [[1, 1], [0, 1]]
    assert row_times([R3, Fraction("0.4")], st_.matrix) == [R3, R7]


def test_rauzy_step_bottom_example():
    st_ = rauzy_step([R7, R3], ROT)
    assert st_.kind == "bottom"
    assert [Fraction(x, 10) for x in st_.next_lambda] == [Fraction("0.4"), R3]
    assert determinant([list(r) for r in st_.matrix]) == 1


def test_tie_raises():
    with pytest.raises(TieBreakUndefined):
        rauzy_step([1, 1], ROT)
    with pytest.raises(TieBreakUndefined):
        rauzy_step([100, 103], ROT, floor=5)


def test_zorich_step_example():
    st_ = zorich_step([R3, R7], ROT)
    assert st_.kind == "top" and st_.rauzy_count == 2
    assert st_.matrix == mat_mul([[1, 1], [0, 1]], [[1, 1], [0, 1]])
    lam = st_.normalized_lengths
    assert lam[0] / lam[1] == 3
    assert step_kind(st_.next_lambda, st_.next_perm) == "bottom"


def test_step_cap():
    with pytest.raises(StepCapExceeded):
        zorich_step([1, 10 ** 7], ROT, step_cap=10)


@settings(max_examples=80, deadline=None)
@given(iet_params(max_len=10 ** 4))
def test_zorich_matches_rauzy_oracle(params):
    perm, lam = params
    try:
        st_ = zorich_step(lam, perm)
    except (TieBreakUndefined, StepCapExceeded):
        return
    B, lam2, t2, b2 = oracles.brute_zorich(dict(zip(perm.alphabet, lam)), perm.top, perm.bottom, perm.alphabet)
    assert sympy.Matrix(st_.matrix) == B
    assert [lam2[a] for a in perm.alphabet] == list(st_.next_lambda)
    assert (st_.next_perm.top, st_.next_perm.bottom) == (t2, b2)
    assert all(x >= 0 for r in st_.matrix for x in r)
    assert abs(determinant(st_.matrix)) == 1
    assert row_times(st_.next_lambda, st_.matrix) == list(lam)


@settings(max_examples=40, deadline=None)
@given(iet_params(dmin=3, max_len=10 ** 30), st.integers(1, 30))
def test_induction_identity_along_orbits(params, k):
    perm, lam = params
    steps = []
    try:
        for s in zorich_orbit(lam, perm, k):
            steps.append(s)
    except (ArithmeticError, StepCapExceeded):
        pass
    if not steps:
        return
    B = path_product(steps)
    assert row_times(steps[-1].next_lambda, B) == list(lam)
    # entries never decrease along the path
    prev = path_product(steps[:-1]) or [[int(i == j) for j in range(perm.d)] for i in range(perm.d)]
    assert all(b >= a for ra, rb in zip(prev, B) for a, b in zip(ra, rb))


def test_zorich_product_equals_rauzy_path():
    lam = SimplexSampler(4, 3, 0).lengths(200)
    perm = parse_permutation("1234/4321")
    zs = list(zorich_orbit(lam, perm, 6))
    rauzy = []
    l, p = list(lam), perm
    for _ in range(sum(z.rauzy_count for z in zs)):
        r = rauzy_step(l, p)
        rauzy.append(r)
        l, p = list(r.next_lambda), r.next_perm
    assert path_product(zs) == path_product(rauzy)
    assert tuple(l) == zs[-1].next_lambda


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_positive_product_within_fifty_steps(d):
    for D in all_rauzy_classes(d):
        perm = D.vertices[0]
        lam = SimplexSampler(d, 11, d).lengths(400)
        M = None
        for s in zorich_orbit(lam, perm, 50):
            B = s.matrix
            M = B if M is None else mat_mul(B, M)
            if all(x > 0 for r in M for x in r):
                break
        assert all(x > 0 for r in M for x in r)


def test_col_examples():
    assert col([[1, 1], [1, 1]]) == 1
    assert col([[1, 2], [3, 4]]) == 3
    with pytest.raises(NonPositiveEntry):
        col([[1, 0], [1, 1]])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4).flatmap(lambda d: st.tuples(
    st.lists(st.lists(st.integers(1, 50), min_size=d, max_size=d), min_size=d, max_size=d),
    st.lists(st.lists(st.integers(0, 50), min_size=d, max_size=d), min_size=d, max_size=d))))
def test_col_contracts_under_nonnegative_products(mats):
    A, B = mats
    if any(all(x == 0 for x in col_) for col_ in zip(*B)):
        return
    assert col(mat_mul(A, B)) <= col(A) + 1e-12


def test_toral_examples():
    _, _, z = toral_zorich_step([R3, R7], ROT, [0, 0])
    assert z.is_zero()
    _, _, z = toral_zorich_step([R3, R7], ROT, [Fraction(1, 4), Fraction(1, 3)])
    assert z.values == (Fraction(11, 12), Fraction(1, 3))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_rational_fibers_closed(p):
    for d in (2, 3, 4):
        for D in all_rauzy_classes(d):
            perm = D.vertices[0]
            st_ = zorich_step(SimplexSampler(d, p, d).lengths(100), perm)
            for nums in product(range(p), repeat=d):
                z = TwistParameter(nums, p).apply(st_.matrix)
                assert all(v.denominator in (1, p) or p % v.denominator == 0 for v in z.values)
                assert z.values == tuple(Fraction(sum(m * a for m, a in zip(row, nums)), p) % 1
                                         for row in st_.matrix)


def test_heights_are_row_sums():
    assert heights([[1, 2], [0, 1]]) == [3, 1]


def test_bitstream_prefix_consistent():
    a = BitStream(5, 1)
    short = a.value(64)
    long_ = a.value(192)
    assert long_ >> 128 == short
    assert BitStream(5, 1).value(192) == long_


def test_simplex_sampler_sums_to_power():
    lam = SimplexSampler(5, 1, 2).lengths(90)
    assert sum(lam) == 1 << 90 and min(lam) > 0
    coarse = SimplexSampler(5, 1, 2).lengths(60)
    assert np.allclose(np.array(lam, float) / 2 ** 90, np.array(coarse, float) / 2 ** 60, atol=2 ** -55)
