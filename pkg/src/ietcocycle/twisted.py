"""Twisted Rauzy-Veech and Zorich matrices.

At each Rauzy step with winner ``w`` and loser ``l`` (both alphabet indices)
the twisted matrix acts on rows as

* top type:    ``row_l += e(zeta_l) row_w``
* bottom type: ``row_l  = e(zeta_w) row_l + row_w``

and the twist is then pushed forward by the integer matrix, ``zeta_l +=
zeta_w``. With ``zeta = 0`` both reduce to ``row_l += row_w``.

Scalars come from a *phase function* ``e(a, q)`` returning ``exp(2 pi i a/q)``
in some ring; the default returns the int 1 for ``a = 0 mod q`` and a Python
complex otherwise, so the untwisted case stays in exact integers.
"""
import cmath
import json
from dataclasses import dataclass
from functools import lru_cache
from math import pi
from typing import Sequence

import numpy as np

from . import _exact
from ._cyclotomic import Cyclotomic
from .combinatorics import TOP, Permutation
from .errors import DimensionMismatch
from .iet import TwistParameter, phase
from .renorm import ZorichStep, _lengths, rauzy_step, zorich_step


def numeric_phase(a: int, q: int):
    a %= q
    if a == 0:
        return 1
    return phase(a, q)


def cyclotomic_phase(p: int):
    """Phase function with values in Q(exp(2 pi i / p)); needs ``q | p``."""

    @lru_cache(maxsize=None)
    def e(a: int, q: int):
        if p % q:
            raise ValueError(f"denominator {q} does not divide {p}")
        return Cyclotomic.root(p, a * (p // q))

    return e


def mpmath_phase(dps: int):
    import mpmath

    ctx = mpmath.mp.clone()
    ctx.dps = dps

    def e(a: int, q: int):
        a %= q
        if a == 0:
            return ctx.mpf(1)
        return ctx.expjpi(ctx.mpf(2 * a) / q)

    e.ctx = ctx
    return e


def geometric_phase_sum(a: int, b: int, count: int, q: int, e=numeric_phase):
    """``sum_{i<count} e(a + i b, q)`` in O(log count) ring operations with
    exact phase arguments."""
    total = 0
    block = 1  # sum_{i<m} e(i b) for m = 2^j
    m = 1
    pos = 0
    c = count
    while c:
        if c & 1:
            total = total + e(a + pos * b, q) * block
            pos += m
        c >>= 1
        if c:
            block = block * (1 + e(m * b, q))
            m <<= 1
    return total


@dataclass(frozen=True)
class TwistedMatrix:
    entries: tuple
    source_state: tuple = None

    @property
    def d(self) -> int:
        return len(self.entries)

    def to_numpy(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.entries], dtype=complex)

    def to_json(self) -> str:
        return json.dumps([[[complex(x).real, complex(x).imag] for x in row] for row in self.entries])

    @classmethod
    def from_json(cls, text: str) -> "TwistedMatrix":
        rows = json.loads(text)
        return cls(tuple(tuple(complex(re, im) for re, im in row) for row in rows))

    def __matmul__(self, other: "TwistedMatrix") -> "TwistedMatrix":
        return TwistedMatrix(tuple(map(tuple, _exact.mat_mul(self.entries, other.entries))))


def _twisted_run(step: ZorichStep, zeta: TwistParameter, rows: list, e=numeric_phase):
    """Apply one twisted Zorich step to ``rows`` in place (rows may be a list
    of row lists or a list of scalars) and return the pushed-forward twist."""
    q = zeta.denominator
    z = list(zeta.numerators)
    w = step.winner
    zw = z[w]
    rw = rows[w]
    vector = not isinstance(rw, list)
    for l, c in zip(step.losers, step.loss_counts()):
        if c == 0:
            continue
        if step.kind == TOP:
            g = geometric_phase_sum(z[l], zw, c, q, e)
            if vector:
                rows[l] = rows[l] + g * rw
            else:
                rows[l] = [x + g * y for x, y in zip(rows[l], rw)]
        else:
            g = geometric_phase_sum(0, zw, c, q, e)
            s = e(c * zw, q)
            if vector:
                rows[l] = s * rows[l] + g * rw
            else:
                rows[l] = [s * x + g * y for x, y in zip(rows[l], rw)]
        z[l] += c * zw
    return TwistParameter(tuple(z), q)


def twisted_rauzy_matrix(lengths, perm: Permutation, zeta, e=numeric_phase) -> TwistedMatrix:
    z = TwistParameter.from_values(zeta)
    st = rauzy_step(lengths, perm)
    t, b = perm.index(perm.last_top), perm.index(perm.last_bottom)
    M = _exact.identity(perm.d)
    phase_b = e(z.numerators[b], z.denominator)
    if st.kind == TOP:
        M[b][t] = phase_b
    else:
        M[t][b] = 1
        M[t][t] = phase_b
    return TwistedMatrix(tuple(map(tuple, M)), (tuple(_lengths(lengths)), perm, z))


def twisted_zorich_matrix(lengths, perm: Permutation, zeta, e=numeric_phase, **kw):
    """``(twisted Zorich matrix, (lengths', perm', zeta'))``."""
    z = TwistParameter.from_values(zeta)
    st = zorich_step(lengths, perm, **kw)
    M = _exact.identity(perm.d)
    z2 = _twisted_run(st, z, M, e)
    return TwistedMatrix(tuple(map(tuple, M)), (st.lengths, perm, z)), (st.next_lambda, st.next_perm, z2)


def twisted_zorich_step(step: ZorichStep, zeta: TwistParameter, e=numeric_phase):
    """Twisted matrix of an already computed Zorich step."""
    M = _exact.identity(step.perm.d)
    z2 = _twisted_run(step, zeta, M, e)
    return TwistedMatrix(tuple(map(tuple, M)), (step.lengths, step.perm, zeta)), z2


def apply_twisted(M, f: Sequence):
    entries = M.entries if isinstance(M, TwistedMatrix) else M
    if len(f) != len(entries[0]):
        raise DimensionMismatch(f"matrix has {len(entries[0])} columns, vector has {len(f)} entries")
    return [sum(a * b for a, b in zip(row, f)) for row in entries]


def push_vector(step: ZorichStep, zeta: TwistParameter, f: list, e=numeric_phase) -> TwistParameter:
    """``f <- twisted B^Z f`` in place; returns the next twist."""
    return _twisted_run(step, zeta, f, e)


def twisted_orbit_product(lengths, perm: Permutation, zeta, n: int, e=numeric_phase, **kw):
    """Product of ``n`` consecutive twisted Zorich matrices (latest on the
    left), with the final state."""
    z = TwistParameter.from_values(zeta)
    lam = _lengths(lengths)
    M = _exact.identity(perm.d)
    for _ in range(n):
        st = zorich_step(lam, perm, **kw)
        z = _twisted_run(st, z, M, e)
        lam, perm = list(st.next_lambda), st.next_perm
    return TwistedMatrix(tuple(map(tuple, M))), (tuple(lam), perm, z)


def determinant(entries, ctx=None):
    """Determinant by Gaussian elimination in whatever scalar type the entries
    have (mpmath contexts via ``ctx``)."""
    if ctx is not None:
        return ctx.det(ctx.matrix([[x for x in row] for row in entries]))
    A = [list(r) for r in entries]
    n = len(A)
    det = 1
    for c in range(n):
        p = max(range(c, n), key=lambda i: abs(complex(A[i][c])))
        if A[p][c] == 0:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det = det * A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return det
