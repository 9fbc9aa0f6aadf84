"""Suspensions of an IET by a (p, n)-stopping time, untwisting operators and
the singularity profiles of the associated translation surfaces.

Setting: ``pi`` has its last top letter ``a_t`` first in the bottom row,
``p`` is prime, ``n`` is an integer vector with ``n[a_t]`` prime to ``p`` and
``lambda[a_t] > (p-1)/p`` (normalised). Then every point returns with total
``n``-weight divisible by ``p`` within ``2p - 1`` steps. When moreover
``lambda[a_t] > p/(p+1)``, first return to that condition is an IET on
``p(d-1) + 1`` intervals.
"""
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _exact
from ._cyclotomic import Cyclotomic, exact_rank, rank_lower_bound
from .combinatorics import Permutation, genus_and_singularities, validate_permutation
from .errors import (BadPermutationShape, BoundViolated, DegenerateInterval, NonMatchingBreakpoints,
                     OutOfDomain, Reducible)
from .iet import IetMap, TwistParameter, build_iet, phase, to_grid, twisted_birkhoff_sum
from .validation import check_prime


def check_shape(perm: Permutation) -> None:
    if perm.monodromy()[-1] != 1:
        raise BadPermutationShape("the last top letter must come first in the bottom row")


def in_delta_p(lengths, perm: Permutation, p: int) -> bool:
    check_shape(perm)
    check_prime(p)
    lam = [Fraction(x) for x in lengths]
    return lam[perm.index(perm.last_top)] / sum(lam) > Fraction(p - 1, p)


def fp_map(lam_hat: Sequence, s, p: int, perm: Permutation = None) -> list:
    """Point of the leaf through ``lam_hat`` at parameter ``s``: the other
    letters get ``(s/p) lam_hat``, the last top letter gets ``1 - s/p``.

    ``lam_hat`` is listed in alphabet order with ``a_t`` omitted; without
    ``perm`` the ``a_t`` coordinate is appended at the end.
    """
    check_prime(p)
    s = Fraction(s)
    if not 0 <= s < 1:
        raise OutOfDomain("s must lie in [0, 1)")
    hat = [Fraction(x) for x in lam_hat]
    if sum(hat) != 1:
        raise ValueError("lam_hat must sum to one")
    other = [s / p * x for x in hat]
    last = (1 - s) + s * (p - 1) / p
    if perm is None:
        return other + [last]
    check_shape(perm)
    t = perm.index(perm.last_top)
    return other[:t] + [last] + other[t:]


def s_of_theta(theta: float) -> float:
    """Leaf parameter whose suspension is the return map in direction ``theta``."""
    if not 0 < theta < math.pi / 2:
        raise OutOfDomain("theta must lie strictly between 0 and pi/2")
    return 1.0 / (1.0 + math.tan(theta))


@dataclass(frozen=True)
class SuspensionInterval:
    label: str
    letter: object        # base letter, or None for the long interval
    depth: int            # j with the interval equal to T^{-j}(I_letter)
    start: int            # grid units
    end: int
    stopping_time: int
    shift: int            # S(x) = x + shift on this interval


@dataclass
class SuspensionIet:
    base: IetMap
    p: int
    nvec: tuple
    intervals: list       # domain order
    perm_S: Permutation
    lengths_S: tuple
    m: dict = field(default_factory=dict)   # letter -> m_alpha

    @property
    def map(self) -> IetMap:
        return IetMap(self.perm_S, [iv.end - iv.start for iv in self.intervals], self.base.unit)

    def residues(self) -> dict:
        """``letter -> {stopping time mod p}`` over the intervals of that letter."""
        out = {}
        for iv in self.intervals:
            if iv.letter is not None:
                out.setdefault(iv.letter, set()).add(iv.stopping_time % self.p)
        return out

    def interval_index(self, u) -> int:
        lo, hi = 0, len(self.intervals)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.intervals[mid].start <= u:
                lo = mid
            else:
                hi = mid
        return lo

    def table(self) -> list:
        unit = self.base.unit
        return [{"label": iv.label, "start": str(Fraction(iv.start, unit)), "end": str(Fraction(iv.end, unit)),
                 "stopping_time": iv.stopping_time, "residue": iv.stopping_time % self.p}
                for iv in self.intervals]


def stopping_time(T: IetMap, nvec: Sequence[int], p: int, x) -> int:
    """Least ``t >= 1`` with ``sum_{j<t} n(T^j x) = 0 mod p``."""
    u = T.to_grid_point(x) if not isinstance(x, int) else x
    return _stopping_time_grid(T, nvec, p, u)


def _stopping_time_grid(T, nvec, p, u):
    s = 0
    for t in range(1, 2 * p):
        i = T.letter_index(u)
        s = (s + nvec[i]) % p
        u += T.grid_delta[i]
        if s == 0:
            return t
    raise BoundViolated(f"stopping time exceeds 2p-1 = {2 * p - 1}")


def build_suspension(lengths, perm: Permutation, nvec: Sequence[int], p: int) -> SuspensionIet:
    check_shape(perm)
    check_prime(p)
    nvec = tuple(int(x) for x in nvec)
    t_idx = perm.index(perm.last_top)
    if nvec[t_idx] % p == 0:
        raise ValueError("n at the last top letter must be prime to p")
    T = lengths if isinstance(lengths, IetMap) else build_iet(lengths, perm)
    if not in_delta_p(T.grid_lengths, perm, p):
        raise ValueError("lengths are not in the slab (last top length <= (p-1)/p)")
    if T.grid_lengths[t_idx] * (p + 1) <= p * T.grid_total:
        # inside the slab but too short for T^j(I_a), 0 < |j| <= p, to stay in I_{a_t}
        raise DegenerateInterval("the suspension needs last top length > p/(p+1)")
    # T^{-j}(I_a) for a != a_t: pull back the whole interval j times
    raw = []
    for i, a in enumerate(perm.alphabet):
        if i == t_idx:
            continue
        k = perm.top.index(a)
        lo = T._top_starts[k]
        hi = lo + T.grid_lengths[i]
        for j in range(p):
            raw.append((lo, hi, a, j))
            lo2, hi2 = T.inverse_step(lo), T.inverse_step(hi - 1) + 1
            if hi2 - lo2 != hi - lo:
                raise NonMatchingBreakpoints("pullback is not a single interval")
            lo, hi = lo2, hi2
    raw.sort()
    # the long interval: complement of the pulled-back pieces
    gaps = []
    cur = 0
    for lo, hi, _, _ in raw:
        if lo > cur:
            gaps.append((cur, lo))
        if lo < cur:
            raise NonMatchingBreakpoints("pulled-back intervals overlap")
        cur = hi
    if cur < T.grid_total:
        gaps.append((cur, T.grid_total))
    if len(gaps) != 1:
        raise DegenerateInterval(f"expected one long interval, found {len(gaps)}")
    pieces = raw + [(gaps[0][0], gaps[0][1], None, 0)]
    pieces.sort()
    intervals = []
    for lo, hi, a, j in pieces:
        if hi <= lo:
            raise DegenerateInterval("empty suspension interval")
        t = _stopping_time_grid(T, nvec, p, lo)
        u = lo
        for _ in range(t):
            u = T.step(u)
        label = "~" if a is None else f"{a}_{j}"
        intervals.append(SuspensionInterval(label, a, j, lo, hi, t, u - lo))
    top = tuple(iv.label for iv in intervals)
    bottom = tuple(iv.label for iv in sorted(intervals, key=lambda iv: iv.start + iv.shift))
    try:
        perm_S = validate_permutation(top, bottom)
    except Reducible:
        perm_S = Permutation(top, bottom)
    m = {}
    for a in perm.alphabet:
        i = perm.index(a)
        if i != t_idx:
            m[a] = next(mm for mm in range(p) if (nvec[i] + mm * nvec[t_idx]) % p == 0)
    return SuspensionIet(T, p, nvec, intervals, perm_S,
                         tuple(Fraction(iv.end - iv.start, T.unit) for iv in intervals), m)


def _orbit_letters(S: SuspensionIet, iv: SuspensionInterval) -> list:
    T = S.base
    u = iv.start
    out = []
    for _ in range(iv.stopping_time):
        i = T.letter_index(u)
        out.append(i)
        u += T.grid_delta[i]
    return out


def untwist_operator(S: SuspensionIet, k: int, exact: bool = False) -> list:
    """Matrix of ``O_k`` (rows: suspension intervals, columns: base letters).

    Entries are complex numbers, or :class:`Cyclotomic` elements when
    ``exact`` is set.
    """
    p, n = S.p, S.nvec
    if not 0 <= k < p:
        raise ValueError("k must lie in [0, p)")
    d = S.base.d
    rows = []
    for iv in S.intervals:
        row = [Cyclotomic.const(p, 0) if exact else 0j for _ in range(d)]
        a = 0
        for i in _orbit_letters(S, iv):
            row[i] = row[i] + (Cyclotomic.root(p, a) if exact else phase(a, p))
            a = (a + k * n[i]) % p
        rows.append(row)
    return rows


def stacked_operator(S: SuspensionIet, exact: bool = False) -> list:
    """``[O_0 | O_1 | ... | O_{p-1}]``."""
    mats = [untwist_operator(S, k, exact) for k in range(S.p)]
    return [sum((m[r] for m in mats), []) for r in range(len(S.intervals))]


def numeric_rank(M, tol: float = 1e-8) -> int:
    A = np.array([[complex(x) for x in row] for row in M], dtype=complex)
    s = np.linalg.svd(A, compute_uv=False)
    return int((s > tol * max(1.0, s[0])).sum()) if len(s) else 0


def kernel_dimension(S: SuspensionIet, k: int, exact: bool = False) -> int:
    M = untwist_operator(S, k, exact)
    r = exact_rank(M) if exact else numeric_rank(M)
    return S.base.d - r


def stacked_rank(S: SuspensionIet, exact: bool = False) -> int:
    M = stacked_operator(S, exact)
    if not exact:
        return numeric_rank(M)
    full = len(S.intervals)
    r = rank_lower_bound(M, S.p)
    return r if r == full else exact_rank(M)


def alpha_t_identity(S: SuspensionIet) -> bool:
    """``sum_k O_k(1_{a_t}) = p 1_{a_t}``, checked exactly."""
    perm = S.base.perm
    t = perm.index(perm.last_top)
    total = [Cyclotomic.const(S.p, 0)] * len(S.intervals)
    for k in range(S.p):
        col = [row[t] for row in untwist_operator(S, k, exact=True)]
        total = [a + b for a, b in zip(total, col)]
    want = [S.p if S.base.letter_index(iv.start) == t else 0 for iv in S.intervals]
    return all(a == Cyclotomic.const(S.p, w) for a, w in zip(total, want))


def conjugacy_sides(S: SuspensionIet, f: Sequence, k: int, x, ell: int):
    """Both sides of the untwisting identity: the twisted sum of ``f`` up to
    the ``ell``-th return, and the ordinary ``ell``-step sum of ``O_k f``
    under ``S``."""
    T = S.base
    O = untwist_operator(S, k)
    Of = [sum(a * b for a, b in zip(row, f)) for row in O]
    u = T.to_grid_point(x)
    rhs = 0j
    m = 0
    for _ in range(ell):
        j = S.interval_index(u)
        iv = S.intervals[j]
        rhs += Of[j]
        m += iv.stopping_time
        u += iv.shift
    zeta = TwistParameter(tuple(k * a for a in S.nvec), S.p)
    lhs = twisted_birkhoff_sum(T, list(f), zeta, x, m)
    return lhs, rhs


def birkhoff_conjugacy_check(S: SuspensionIet, f: Sequence, k: int, x, ell: int, tol: float = 2.0 ** -40) -> bool:
    lhs, rhs = conjugacy_sides(S, f, k, x, ell)
    return abs(lhs - rhs) <= tol * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# Square surfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularityProfile:
    genus: int
    orders: tuple
    omega_genus: int = None

    @property
    def true_orders(self) -> tuple:
        return tuple(m for m in self.orders if m)

    def gauss_bonnet(self) -> bool:
        return sum(self.true_orders) == 2 * self.genus - 2

    def to_dict(self) -> dict:
        return {"genus": self.genus, "orders": list(self.orders), "true_orders": list(self.true_orders),
                "omega_genus": self.omega_genus}


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def surface_profile(T: IetMap, construction: str = "polygon") -> SingularityProfile:
    """Cone points and genus of a translation surface carrying ``T`` as a
    return map.

    ``"polygon"``: the zippered polygon over ``T`` (see ``_polygon_profile``).
    ``"square"``: the unit square with top glued to bottom by ``T`` and left
    glued to right. Its boundary points are keyed by side and grid
    coordinate; each contributes a wedge of ``pi`` (``pi/2`` at a corner), so
    angles are counted in units of ``pi/2``. The left/right gluing turns the
    bottom edge into a circle, which can change the stratum.
    """
    if construction == "polygon":
        return _polygon_profile(T)
    if construction != "square":
        raise ValueError("construction must be 'square' or 'polygon'")
    L = T.grid_total
    uf = _UnionFind()
    wedge = Counter()
    top_pts = set(T._top_starts) | {L}
    bot_pts = set(T._bot_starts) | {L}
    for x in top_pts:
        wedge[("t", x)] = 1 if x in (0, L) else 2
    for x in bot_pts:
        wedge[("b", x)] = 1 if x in (0, L) else 2
    uf.union(("t", 0), ("t", L))
    uf.union(("b", 0), ("b", L))
    for k, a in enumerate(T.perm.top):
        i = T.perm.index(a)
        lo = T._top_starts[k]
        hi = lo + T.grid_lengths[i]
        for x in (lo, hi):
            y = x + T.grid_delta[i]
            if ("b", y) not in wedge:
                raise NonMatchingBreakpoints(f"top point {x} has no partner on the bottom")
            uf.union(("t", x), ("b", y))
    angle = Counter()
    for key, w in wedge.items():
        angle[uf.find(key)] += w
    orders = []
    for a in angle.values():
        if a % 4:
            raise NonMatchingBreakpoints("cone angle is not a multiple of 2 pi")
        orders.append(a // 4 - 1)
    V = len(orders)
    euler = V - (T.d + 1) + 1
    if euler % 2:
        raise NonMatchingBreakpoints("odd Euler characteristic")
    genus = (2 - euler) // 2
    try:
        og = genus_and_singularities(T.perm).genus
    except Exception:
        og = None
    return SingularityProfile(genus, tuple(sorted(orders, reverse=True)), og)


def _polygon_profile(T: IetMap) -> SingularityProfile:
    """Cone points of the zippered polygon: sides ``(lambda_a, tau_a)`` laid
    out in top order above and bottom order below, with ``tau`` the standard
    zipping vector, each side glued to its twin by translation."""
    from .combinatorics import standard_zipping_vector

    perm = T.perm
    tau = standard_zipping_vector(perm)
    vec = {a: (float(T.grid_lengths[perm.index(a)]) / T.grid_total, float(tau[perm.index(a)]))
           for a in perm.alphabet}
    d = perm.d

    def walk(row):
        pts = [(0.0, 0.0)]
        for a in row:
            x, y = pts[-1]
            pts.append((x + vec[a][0], y + vec[a][1]))
        return pts

    top, bot = walk(perm.top), walk(perm.bottom)
    # counterclockwise boundary: bottom line left to right, then top line back
    names = [("o",)] + [("b", k) for k in range(1, d)] + [("e",)] + [("t", k) for k in range(d - 1, 0, -1)]
    coords = [bot[0]] + bot[1:d] + [bot[d]] + [top[k] for k in range(d - 1, 0, -1)]
    n = len(coords)
    angle = {}
    for i in range(n):
        ux, uy = coords[i - 1]
        vx, vy = coords[i]
        wx, wy = coords[(i + 1) % n]
        e1, e2 = (vx - ux, vy - uy), (wx - vx, wy - vy)
        turn = math.atan2(e1[0] * e2[1] - e1[1] * e2[0], e1[0] * e2[0] + e1[1] * e2[1])
        angle[names[i]] = math.pi - turn
    uf = _UnionFind()

    def key(line, k):
        if k == 0:
            return ("o",)
        if k == d:
            return ("e",)
        return (line, k)

    for a in perm.alphabet:
        kt, kb = perm.top.index(a), perm.bottom.index(a)
        uf.union(key("t", kt), key("b", kb))
        uf.union(key("t", kt + 1), key("b", kb + 1))
    for nm in names:
        uf.find(nm)
    total = Counter()
    for nm in names:
        total[uf.find(nm)] += angle[nm]
    orders = []
    for a in total.values():
        m = a / (2 * math.pi) - 1
        if abs(m - round(m)) > 1e-6:
            raise NonMatchingBreakpoints("cone angle is not a multiple of 2 pi")
        orders.append(int(round(m)))
    V = len(orders)
    euler = V - d + 1
    if euler % 2:
        raise NonMatchingBreakpoints("odd Euler characteristic")
    try:
        og = genus_and_singularities(perm).genus
    except Exception:
        og = None
    return SingularityProfile((2 - euler) // 2, tuple(sorted(orders, reverse=True)), og)


def y_lengths(lam_hat: Sequence, perm: Permutation) -> list:
    """``(lam_hat / 2, 1/2)`` with the half assigned to the last top letter."""
    hat = [Fraction(x) / 2 for x in lam_hat]
    t = perm.index(perm.last_top)
    return hat[:t] + [Fraction(1, 2)] + hat[t:]


def x_lengths(lam_hat: Sequence, perm: Permutation, p: int) -> list:
    return fp_map(lam_hat, Fraction(p + 1, 2 * p), p, perm)


def lifts(y_orders: Sequence[int], p: int):
    """All multisets of X-orders obtainable by lifting each Y point either to
    one point of order ``p(m+1)-1`` or to ``p`` points of order ``m``."""
    out = {()}
    for m in y_orders:
        nxt = set()
        for acc in out:
            nxt.add(tuple(sorted(acc + (p * (m + 1) - 1,))))
            nxt.add(tuple(sorted(acc + (m,) * p)))
        out = nxt
    return out


@dataclass
class CoverReport:
    x: SingularityProfile
    y: SingularityProfile
    genus_lower: int
    genus_upper: int
    genus_bound: bool
    order_lifting: bool

    @property
    def holds(self) -> bool:
        return self.genus_bound and self.order_lifting and self.x.gauss_bonnet() and self.y.gauss_bonnet()

    def to_dict(self) -> dict:
        return {"X": self.x.to_dict(), "Y": self.y.to_dict(), "genus_bounds": [self.genus_lower, self.genus_upper],
                "genus_bound_holds": self.genus_bound, "order_lifting_holds": self.order_lifting,
                "verdict": self.holds}


def cover_check(lam_hat: Sequence, perm: Permutation, nvec: Sequence[int], p: int,
                construction: str = "polygon") -> CoverReport:
    """Profiles of X (suspension of the stopping-time IET) and Y (suspension
    of the base IET at half scale) and the genus bound and order-lifting
    relations between them. Orders include fake (order zero) points."""
    Y = surface_profile(build_iet(y_lengths(lam_hat, perm), perm), construction)
    S = build_suspension(x_lengths(lam_hat, perm, p), perm, nvec, p)
    X = surface_profile(S.map, construction)
    g = genus_and_singularities(perm).genus
    lo, hi = p * (g - 1) + 1, (p * perm.d) // 2
    lifted = tuple(sorted(X.orders)) in lifts(Y.orders, p)
    return CoverReport(X, Y, lo, hi, lo <= X.genus <= hi, lifted)


def shaped_permutations(d: int):
    """Irreducible permutations on ``0..d-1`` (top row fixed) whose last top
    letter is first in the bottom row."""
    from .combinatorics import irreducible_permutations

    for perm in irreducible_permutations(d):
        if perm.monodromy()[-1] == 1:
            yield perm


def residue_grid(perm: Permutation, p: int):
    """``n`` vectors with entries in ``{0, 1, (p-1)/2, p-1}`` off the last top
    letter and ``{1, p-1}`` on it."""
    t = perm.index(perm.last_top)
    vals = sorted({0, 1, (p - 1) // 2, p - 1})
    from itertools import product

    for rest in product(vals, repeat=perm.d - 1):
        for nt in sorted({1, p - 1}):
            yield tuple(rest[:t]) + (nt,) + tuple(rest[t:])


def suspension_report(lam_hat: Sequence, perm: Permutation, nvec: Sequence[int], p: int,
                      exact: bool = False, construction: str = "polygon") -> dict:
    """Interval table, ``perm_S``, profiles of X and Y, the cover verdict and
    the structural checks of the stopping-time suspension at ``F_p(lam_hat,
    (p+1)/(2p))``."""
    S = build_suspension(x_lengths(lam_hat, perm, p), perm, nvec, p)
    cover = cover_check(lam_hat, perm, nvec, p, construction)
    d = perm.d
    res = S.residues()
    checks = {
        "stopping_time_bound": all(iv.stopping_time <= 2 * p - 1 for iv in S.intervals),
        "interval_count": len(S.intervals) == p * (d - 1) + 1,
        "residue_constancy": all(len(v) == 1 for v in res.values()),
        "kernel_dimension_one": all(kernel_dimension(S, k, exact) == 1 for k in range(1, p)),
        "stacked_surjective": stacked_rank(S, exact) == len(S.intervals),
        "cover_verdict": cover.holds,
    }
    if exact:
        checks["alpha_t_identity"] = alpha_t_identity(S)
    return {
        "p": p,
        "nvec": list(nvec),
        "intervals": S.table(),
        "perm_S": {"top": list(S.perm_S.top), "bottom": list(S.perm_S.bottom)},
        "residues": {str(a): sorted(v) for a, v in res.items()},
        "cover": cover.to_dict(),
        "checks": checks,
        "passed": all(checks.values()),
    }
