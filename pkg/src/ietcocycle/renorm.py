"""Rauzy-Veech induction, Zorich acceleration and the integer cocycle.

Length vectors are projective: integer vectors whose normalised value is
``lengths / sum(lengths)``. Induction only ever subtracts, so the integers
stay exact and Zorich renormalisation is implicit.

Matrices follow the row-vector convention ``lengths_after @ B = lengths_before``.
Every Rauzy matrix is ``I + E_{loser, winner}``, so left multiplication adds
the winner's row to the loser's row.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact
from .combinatorics import BOTTOM, TOP, Permutation, rauzy_matrix, rauzy_move
from .errors import NonPositiveEntry, PrecisionExhausted, StepCapExceeded, TieBreakUndefined
from .iet import TwistParameter

DEFAULT_STEP_CAP = 10 ** 6


def _lengths(lengths) -> list:
    vals = list(lengths)
    if all(isinstance(x, int) for x in vals):
        return vals
    from .iet import to_grid

    return to_grid(vals)[0]


def step_kind(lengths: Sequence[int], perm: Permutation, floor: int = 0) -> str:
    lt = lengths[perm.index(perm.last_top)]
    lb = lengths[perm.index(perm.last_bottom)]
    if lt == lb or abs(lt - lb) < floor:
        raise TieBreakUndefined(f"last intervals have equal length ({lt} vs {lb})")
    return TOP if lt > lb else BOTTOM


@dataclass(frozen=True)
class RauzyStep:
    kind: str
    matrix: tuple
    next_lambda: tuple
    next_perm: Permutation


def rauzy_step(lengths, perm: Permutation, floor: int = 0) -> RauzyStep:
    lam = _lengths(lengths)
    kind = step_kind(lam, perm, floor)
    t, b = perm.index(perm.last_top), perm.index(perm.last_bottom)
    win, lose = (t, b) if kind == TOP else (b, t)
    lam[win] -= lam[lose]
    return RauzyStep(kind, tuple(map(tuple, rauzy_matrix(perm, kind))), tuple(lam), rauzy_move(perm, kind))


@dataclass(frozen=True)
class ZorichStep:
    """A maximal run of Rauzy steps of one type.

    ``losers`` lists alphabet indices in the order they lose during one
    cycle of the run; the k-th Rauzy step of the run has loser
    ``losers[k % len(losers)]`` and winner ``winner`` throughout.
    """

    kind: str
    winner: int
    losers: tuple
    rauzy_count: int
    perm: Permutation
    lengths: tuple
    next_perm: Permutation
    next_lambda: tuple

    def loss_counts(self) -> list:
        """How many times each entry of ``losers`` loses in this run."""
        q, r = divmod(self.rauzy_count, len(self.losers))
        return [q + (i < r) for i in range(len(self.losers))]

    @property
    def matrix(self) -> list:
        M = _exact.identity(self.perm.d)
        for l, c in zip(self.losers, self.loss_counts()):
            M[l][self.winner] += c
        return M

    @property
    def normalized_lengths(self) -> tuple:
        s = sum(self.next_lambda)
        return tuple(Fraction(x, s) for x in self.next_lambda)

    def apply_to_vector(self, v):
        """``B^Z v`` in place for a mutable vector (numpy or list)."""
        w = v[self.winner]
        for l, c in zip(self.losers, self.loss_counts()):
            v[l] += c * w
        return v

    def apply_to_rows(self, M):
        """``B^Z M`` in place for a 2-d numpy array."""
        w = M[self.winner].copy()
        for l, c in zip(self.losers, self.loss_counts()):
            M[l] += c * w
        return M


def _loser_cycle(perm: Permutation, kind: str) -> list:
    if kind == TOP:
        row, win = perm.bottom, perm.last_top
    else:
        row, win = perm.top, perm.last_bottom
    after = row[row.index(win) + 1:]
    return [perm.index(a) for a in reversed(after)]


def zorich_step(lengths, perm: Permutation, step_cap: int = DEFAULT_STEP_CAP, floor: int = 0) -> ZorichStep:
    """Accumulate Rauzy steps of one type until the type changes.

    Whole cycles through the losers are taken in one division. ``floor`` is
    a grid-unit separation floor: lengths below it raise
    :class:`PrecisionExhausted`, near-ties raise :class:`TieBreakUndefined`.
    """
    lam = _lengths(lengths)
    kind = step_kind(lam, perm, floor)
    win = perm.index(perm.last_top if kind == TOP else perm.last_bottom)
    cyc = _loser_cycle(perm, kind)
    cycle_total = sum(lam[i] for i in cyc)
    full = max(0, lam[win] // cycle_total - 1)
    lam0 = tuple(lam)
    lam[win] -= full * cycle_total
    count = full * len(cyc)
    if count > step_cap:
        raise StepCapExceeded(f"more than {step_cap} Rauzy steps of one type")
    while True:
        loser = cyc[count % len(cyc)]
        if lam[win] == lam[loser] or abs(lam[win] - lam[loser]) < floor:
            raise TieBreakUndefined("tie inside a Zorich run")
        if lam[win] < lam[loser]:
            break
        lam[win] -= lam[loser]
        count += 1
        if count > step_cap:
            raise StepCapExceeded(f"more than {step_cap} Rauzy steps of one type")
    if min(lam) < floor:
        raise PrecisionExhausted("a length fell below the separation floor")
    nxt = perm
    for _ in range(count % len(cyc)):
        nxt = rauzy_move(nxt, kind)
    return ZorichStep(kind, win, tuple(cyc), count, perm, lam0, nxt, tuple(lam))


def zorich_orbit(lengths, perm: Permutation, n: int, **kw):
    """Generator of ``n`` consecutive Zorich steps."""
    lam = _lengths(lengths)
    for _ in range(n):
        st = zorich_step(lam, perm, **kw)
        yield st
        lam, perm = list(st.next_lambda), st.next_perm


def path_product(steps) -> list:
    """``B_k ... B_1`` for a sequence of steps (Rauzy or Zorich)."""
    M = None
    for st in steps:
        B = [list(r) for r in st.matrix]
        M = B if M is None else _exact.mat_mul(B, M)
    return M


def col(A) -> float:
    """``max_{i,j,k} A_ij / A_kj`` for a matrix with positive entries."""
    A = [list(r) for r in A]
    if any(x <= 0 for r in A for x in r):
        raise NonPositiveEntry("col needs strictly positive entries")
    best = Fraction(1)
    for j in range(len(A[0])):
        column = [r[j] for r in A]
        best = max(best, Fraction(max(column)) / Fraction(min(column)))
    return float(best)


def toral_zorich_step(lengths, perm: Permutation, zeta, **kw):
    """``(lengths', perm', B^Z zeta mod Z^d)``."""
    st = zorich_step(lengths, perm, **kw)
    z = TwistParameter.from_values(zeta)
    return st.next_lambda, st.next_perm, z.apply(st.matrix)


def heights(matrix) -> list:
    """Tower heights ``B 1``."""
    return [sum(r) for r in matrix]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

class BitStream:
    """Prefix-consistent random bits: asking for more bits later extends the
    same number rather than drawing a new one."""

    def __init__(self, *seed):
        self._gen = np.random.default_rng(list(seed)).bit_generator
        self._words = []

    def value(self, bits: int) -> int:
        """The first ``bits`` bits as an integer in ``[0, 2**bits)``."""
        need = -(-bits // 64)
        while len(self._words) < need:
            self._words.extend(int(w) for w in self._gen.random_raw(need - len(self._words)))
        x = 0
        for w in self._words[:need]:
            x = (x << 64) | w
        return x >> (64 * need - bits)


def simplex_point(streams: Sequence[BitStream], bits: int) -> list:
    """Uniform point of the simplex as integer lengths summing to ``2**bits``,
    from ``len(streams) + 1`` sorted spacings."""
    pts = sorted(s.value(bits) for s in streams)
    cuts = [0] + pts + [1 << bits]
    lam = [b - a for a, b in zip(cuts, cuts[1:])]
    return lam


class SimplexSampler:
    """Lebesgue-uniform lengths with on-demand refinement of precision."""

    def __init__(self, d: int, *seed):
        self.d = d
        self.streams = [BitStream(*seed, i) for i in range(d - 1)]

    def lengths(self, bits: int) -> list:
        lam = simplex_point(self.streams, bits)
        if min(lam) == 0:
            raise PrecisionExhausted("degenerate sample at this precision")
        return lam


class TorusSampler:
    """Lebesgue-uniform point of the torus, with the same refinement rule."""

    def __init__(self, d: int, *seed):
        self.streams = [BitStream(*seed, 1000 + i) for i in range(d)]

    def twist(self, bits: int) -> TwistParameter:
        return TwistParameter(tuple(s.value(bits) for s in self.streams), 1 << bits)
