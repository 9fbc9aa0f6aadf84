import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ietcocycle import (TwistParameter, TwistedMatrix, parse_permutation, rauzy_matrix, twisted_rauzy_matrix,
                        twisted_zorich_matrix, zorich_step)
from ietcocycle.errors import DimensionMismatch, TieBreakUndefined
from ietcocycle.renorm import SimplexSampler, TorusSampler, zorich_orbit
from ietcocycle.twisted import (apply_twisted, cyclotomic_phase, determinant, geometric_phase_sum, mpmath_phase,
                                twisted_orbit_product, twisted_zorich_step)

import oracles
from conftest import iet_params

ROT = parse_permutation("AB/BA")
R3, R7 = Fraction("0.3"), Fraction("0.7")
HALF = Fraction(1, 2)


def as_complex(M):
    return np.array([[complex(x) for x in row] for row in (M.entries if isinstance(M, TwistedMatrix) else M)])


def oracle_twisted_zorich(lam, perm, zeta):
    """Product of the displayed twisted Rauzy matrices along the toral Rauzy
    orbit, one factor per Rauzy step of the Zorich run."""
    d = perm.d
    alphabet = perm.alphabet
    idx = {a: i for i, a in enumerate(alphabet)}
    lengths = dict(zip(alphabet, lam))
    z = dict(zip(alphabet, [Fraction(x) % 1 for x in zeta]))
    t, b = perm.top, perm.bottom
    P = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    kind0 = None
    while True:
        kind = "top" if lengths[t[-1]] > lengths[b[-1]] else "bottom"
        if kind0 is not None and kind != kind0:
            return P, z
        kind0 = kind
        at, ab = t[-1], b[-1]
        phase_b = cmath.exp(2j * math.pi * float(z[ab]))
        M = oracles.twisted_rauzy_by_formula(kind, idx[at], idx[ab], d, phase_b)
        P = oracles.matmul(M, P)
        kind, lengths, t, b, win, lose = oracles.brute_rauzy(lengths, t, b)
        z[lose] = (z[lose] + z[win]) % 1


def test_zero_twist_is_rauzy_matrix():
    for lam, kind in (([R3, R7], "top"), ([R7, R3], "bottom")):
        M = twisted_rauzy_matrix(lam, ROT, [0, 0])
        assert [list(r) for r in M.entries] == rauzy_matrix(ROT, kind)
        assert all(isinstance(x, int) for r in M.entries for x in r)


def test_top_type_half_twist():
    # alpha_b = A, alpha_t = B: I - E_{AB}
    M = twisted_rauzy_matrix([R3, R7], ROT, [HALF, 0])
    assert np.allclose(as_complex(M), [[1, -1], [0, 1]], atol=1e-15)


def test_bottom_type_half_twist_determinant():
    M = twisted_rauzy_matrix([R7, R3], ROT, [HALF, 0])
    assert abs(determinant(M.entries) - (-1)) < 1e-15
    p = parse_permutation("ABC/CBA")
    M = twisted_rauzy_matrix([5, 1, 3], p, [HALF, 0, 0])
    assert abs(determinant(M.entries) - (-1)) < 1e-15


def test_zorich_zero_twist_and_example():
    M, (lam2, p2, z2) = twisted_zorich_matrix([R3, R7], ROT, [0, 0])
    assert [list(r) for r in M.entries] == zorich_step([R3, R7], ROT).matrix
    assert z2.is_zero()
    M, _ = twisted_zorich_matrix([R3, R7], ROT, [HALF, 0])
    assert np.allclose(as_complex(M), [[1, -2], [0, 1]], atol=1e-15)


def test_apply_examples():
    f = [1 + 2j, -3.0]
    assert apply_twisted([[1, 0], [0, 1]], f) == f
    assert apply_twisted([[1, -1], [0, 1]], [0, 0]) == [0, 0]
    assert apply_twisted([[1, -1], [0, 1]], [1, 1]) == [0, 1]
    with pytest.raises(DimensionMismatch):
        apply_twisted([[1, 0], [0, 1]], [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(iet_params(max_len=2000), st.lists(st.integers(0, 30), min_size=5, max_size=5))
def test_zorich_matches_rauzy_factor_product(params, znum):
    perm, lam = params
    zeta = [Fraction(a, 31) for a in znum[:perm.d]]
    try:
        M, (_, _, z2) = twisted_zorich_matrix(lam, perm, zeta, step_cap=10 ** 4)
    except (TieBreakUndefined, ArithmeticError, RuntimeError):
        return
    P, zw = oracle_twisted_zorich(lam, perm, zeta)
    assert np.allclose(as_complex(M), np.array(P, dtype=complex), atol=1e-9 * max(1, np.abs(P).max()))
    assert z2.values == tuple(zw[a] for a in perm.alphabet)
    # entrywise modulus bounded by the untwisted entry
    B = zorich_step(lam, perm, step_cap=10 ** 4).matrix
    assert np.all(np.abs(as_complex(M)) <= np.array(B, dtype=float) + 1e-9)


@settings(max_examples=30, deadline=None)
@given(iet_params(dmin=2, max_len=10 ** 12))
def test_zero_fiber_reduction_exact(params):
    perm, lam = params
    try:
        M, _ = twisted_zorich_matrix(lam, perm, [0] * perm.d)
    except (ArithmeticError, RuntimeError):
        return
    assert [list(r) for r in M.entries] == zorich_step(lam, perm).matrix


def test_cocycle_law_rational_exact():
    """A k-step product equals the product of one-step matrices with the
    twist carried along, exactly in cyclotomic arithmetic."""
    perm = parse_permutation("1234/4321")
    lam = SimplexSampler(4, 2, 0).lengths(300)
    zeta = TwistParameter((1, 3, 0, 2), 5)
    e = cyclotomic_phase(5)
    steps = list(zorich_orbit(lam, perm, 8))
    P, z = None, zeta
    for s in steps:
        M, z = twisted_zorich_step(s, z, e)
        P = M if P is None else M @ P
    Q, (_, _, zq) = twisted_orbit_product(lam, perm, zeta, 8, e)
    assert [list(r) for r in P.entries] == [list(r) for r in Q.entries]
    assert z == zq


def test_cocycle_law_floating():
    perm = parse_permutation("12345/53421")
    lam = SimplexSampler(5, 4, 0).lengths(400)
    zeta = TorusSampler(5, 4, 0).twist(80)
    steps = list(zorich_orbit(lam, perm, 10))
    P, z = np.eye(5, dtype=complex), zeta
    for s in steps:
        M, z = twisted_zorich_step(s, z)
        P = as_complex(M) @ P
    Q, _ = twisted_orbit_product(lam, perm, zeta, 10)
    Q = as_complex(Q)
    assert np.abs(P - Q).max() <= 2 ** -40 * np.abs(Q).max()


def test_cyclotomic_matches_numeric():
    perm = parse_permutation("ABCD/DCBA")
    lam = [13, 29, 7, 51]
    zeta = TwistParameter((1, 4, 2, 6), 7)
    M, _ = twisted_zorich_matrix(lam, perm, zeta)
    C, _ = twisted_zorich_matrix(lam, perm, zeta, cyclotomic_phase(7))
    assert np.allclose(as_complex(M), as_complex(C), atol=1e-12)


def test_unit_determinant_along_orbit_mpmath():
    perm = parse_permutation("1234/4321")
    e = mpmath_phase(80)
    lam = SimplexSampler(4, 9, 0).lengths(400)
    zeta = TorusSampler(4, 9, 0).twist(64)
    M, _ = twisted_orbit_product(lam, perm, zeta, 60, e)
    det = determinant(M.entries, e.ctx)
    assert abs(abs(complex(det)) - 1) < 2 ** -40


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 60))
def test_geometric_phase_sum(a, b, count):
    want = sum(cmath.exp(2j * math.pi * (a + i * b) / 41) for i in range(count))
    assert abs(geometric_phase_sum(a, b, count, 41) - want) < 1e-9


def test_json_round_trip():
    M, _ = twisted_zorich_matrix([R3, R7], ROT, [Fraction(1, 3), 0])
    back = TwistedMatrix.from_json(M.to_json())
    assert np.allclose(as_complex(back), as_complex(M))
