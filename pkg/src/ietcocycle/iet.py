"""Interval exchange maps on an exact integer grid, ordinary and twisted
Birkhoff sums, orbit partitions and discrepancy.

Lengths are stored as integers ``grid_lengths`` over a common denominator
``unit``; the real length of letter ``a`` is ``grid_lengths[a] / unit``.
Floats and Fractions convert exactly, so no rounding ever happens.
"""
import cmath
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm, pi
from typing import Sequence

import numpy as np

from .combinatorics import Permutation, validate_permutation
from .errors import DimensionMismatch, NonPositiveLength, PrecisionExhausted

DEFAULT_FLOOR = Fraction(1, 2 ** 90)


def to_grid(values: Sequence):
    """Exact common-denominator form: ``(integers, unit)``."""
    fr = [Fraction(v) for v in values]
    unit = 1
    for x in fr:
        unit = lcm(unit, x.denominator)
    return [int(x * unit) for x in fr], unit


@dataclass(frozen=True)
class TwistParameter:
    """A point of the torus ``R^d / Z^d`` with rational coordinates
    ``numerators / denominator`` reduced into ``[0, denominator)``."""

    numerators: tuple
    denominator: int

    def __post_init__(self):
        q = int(self.denominator)
        if q < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "denominator", q)
        object.__setattr__(self, "numerators", tuple(int(a) % q for a in self.numerators))

    @classmethod
    def from_values(cls, values: Sequence, denominator=None) -> "TwistParameter":
        if isinstance(values, TwistParameter):
            return values
        if denominator is not None:
            return cls(tuple(values), denominator)
        nums, q = to_grid(values)
        return cls(tuple(nums), q)

    @classmethod
    def zero(cls, d: int) -> "TwistParameter":
        return cls((0,) * d, 1)

    @property
    def d(self) -> int:
        return len(self.numerators)

    @property
    def values(self) -> tuple:
        return tuple(Fraction(a, self.denominator) for a in self.numerators)

    def is_zero(self) -> bool:
        return not any(self.numerators)

    def __add__(self, other):
        q = lcm(self.denominator, other.denominator)
        a, b = q // self.denominator, q // other.denominator
        return TwistParameter(tuple(x * a + y * b for x, y in zip(self.numerators, other.numerators)), q)

    def apply(self, matrix) -> "TwistParameter":
        """``B zeta`` reduced mod ``Z^d`` for an integer matrix ``B``."""
        return TwistParameter(tuple(sum(m * z for m, z in zip(row, self.numerators)) for row in matrix),
                              self.denominator)


@lru_cache(maxsize=4096)
def _root_table(q: int):
    return None if q > 1 << 16 else tuple(cmath.exp(2j * pi * a / q) for a in range(q))


def phase(a: int, q: int) -> complex:
    """``exp(2 pi i a / q)``, cached for small ``q``."""
    table = _root_table(q)
    if table is not None:
        return table[a % q]
    return cmath.exp(2j * pi * (Fraction(a % q, q)))


class IetMap:
    """``T(x) = x + delta_a`` on ``I_a``, on the half-open interval
    ``[0, total)``."""

    def __init__(self, perm: Permutation, grid_lengths: Sequence[int], unit: int = 1,
                 separation_floor=DEFAULT_FLOOR):
        if len(grid_lengths) != perm.d:
            raise DimensionMismatch(f"{len(grid_lengths)} lengths for {perm.d} letters")
        if any(x <= 0 for x in grid_lengths):
            raise NonPositiveLength(f"lengths must be positive: {list(grid_lengths)}")
        self.perm = perm
        self.grid_lengths = tuple(int(x) for x in grid_lengths)
        self.unit = int(unit)
        self.separation_floor = Fraction(separation_floor)
        self.grid_total = sum(self.grid_lengths)
        idx = {a: i for i, a in enumerate(perm.alphabet)}
        L = self.grid_lengths
        self._top_letters = [idx[a] for a in perm.top]
        self._bot_letters = [idx[a] for a in perm.bottom]
        self._top_starts = _starts([L[i] for i in self._top_letters])
        self._bot_starts = _starts([L[i] for i in self._bot_letters])
        start_t = {i: s for i, s in zip(self._top_letters, self._top_starts)}
        start_b = {i: s for i, s in zip(self._bot_letters, self._bot_starts)}
        self.grid_delta = tuple(start_b[i] - start_t[i] for i in range(perm.d))

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def lengths(self) -> tuple:
        return tuple(Fraction(x, self.unit) for x in self.grid_lengths)

    @property
    def total(self) -> Fraction:
        return Fraction(self.grid_total, self.unit)

    @property
    def delta(self) -> tuple:
        return tuple(Fraction(x, self.unit) for x in self.grid_delta)

    @property
    def discontinuities(self) -> list:
        """Interior breakpoints of the partition into the ``I_a``."""
        return [Fraction(s, self.unit) for s in self._top_starts[1:]]

    def letter_index(self, u) -> int:
        """Alphabet index of the interval containing the grid coordinate ``u``."""
        return self._top_letters[bisect_right(self._top_starts, u) - 1]

    def step(self, u):
        return u + self.grid_delta[self.letter_index(u)]

    def inverse_step(self, u):
        i = self._bot_letters[bisect_right(self._bot_starts, u) - 1]
        return u - self.grid_delta[i]

    def to_grid_point(self, x):
        u = Fraction(x) * self.unit
        if not 0 <= u < self.grid_total:
            raise ValueError(f"point {x} outside [0, {self.total})")
        return u.numerator if u.denominator == 1 else u

    def __call__(self, x) -> Fraction:
        return Fraction(self.step(self.to_grid_point(x))) / self.unit

    def inverse(self, x) -> Fraction:
        return Fraction(self.inverse_step(self.to_grid_point(x))) / self.unit

    def letter_at(self, x):
        return self.perm.alphabet[self.letter_index(self.to_grid_point(x))]

    def normalized(self) -> "IetMap":
        """Same map rescaled to total length one."""
        return IetMap(self.perm, self.grid_lengths, self.grid_total, self.separation_floor)

    def __repr__(self):
        lam = ", ".join(str(x) for x in self.lengths)
        return f"IetMap({' '.join(map(str, self.perm.top))} / {' '.join(map(str, self.perm.bottom))}; {lam})"


def _starts(lengths):
    out, s = [], 0
    for x in lengths:
        out.append(s)
        s += x
    return out


def build_iet(lengths: Sequence, perm: Permutation, separation_floor=DEFAULT_FLOOR) -> IetMap:
    if any(Fraction(x) <= 0 for x in lengths):
        raise NonPositiveLength(f"lengths must be positive: {list(lengths)}")
    if not perm.is_irreducible():
        validate_permutation(perm.top, perm.bottom)
    ints, unit = to_grid(lengths)
    return IetMap(perm, ints, unit, separation_floor)


def indicator(T: IetMap, letter) -> list:
    f = [0] * T.d
    f[T.perm.index(letter)] = 1
    return f


def birkhoff_sum(T: IetMap, f: Sequence, x, n: int):
    """``sum_{k<n} f(T^k x)`` by direct iteration."""
    if len(f) != T.d:
        raise DimensionMismatch("function has the wrong number of values")
    u = T.to_grid_point(x)
    s = 0
    for _ in range(n):
        i = T.letter_index(u)
        s += f[i]
        u += T.grid_delta[i]
    return s


def twisted_birkhoff_sum(T: IetMap, f: Sequence, zeta, x, n: int) -> complex:
    """``sum_{k<n} e(S_k(zeta, x)) f(T^k x)``; the phase is kept as an exact
    residue mod the denominator of ``zeta``."""
    if len(f) != T.d:
        raise DimensionMismatch("function has the wrong number of values")
    z = TwistParameter.from_values(zeta)
    q, nums = z.denominator, z.numerators
    u = T.to_grid_point(x)
    a = 0
    s = 0j
    for _ in range(n):
        i = T.letter_index(u)
        s += phase(a, q) * f[i]
        a = (a + nums[i]) % q
        u += T.grid_delta[i]
    return s


def orbit_partition(T: IetMap, n: int, extra_breakpoints: Sequence = ()) -> list:
    """Left endpoints of the cells of ``V_{k<n} T^{-k}(P)``, where ``P`` is
    the partition by discontinuities and ``extra_breakpoints``.

    Every function constant on the cells of ``P`` has constant ``n``-step
    Birkhoff sums on each returned cell.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    base = set(T._top_starts[1:])
    for e in extra_breakpoints:
        u = Fraction(e) * T.unit
        if 0 < u < T.grid_total:
            base.add(u.numerator if u.denominator == 1 else u)
    points = {0} | base
    frontier = list(base)
    for _ in range(n - 1):
        frontier = [T.inverse_step(u) for u in frontier]
        points.update(frontier)
    pts = sorted(points)
    floor = T.separation_floor * T.grid_total
    for a, b in zip(pts, pts[1:]):
        if b - a < floor:
            raise PrecisionExhausted(f"breakpoints {a}/{T.unit} and {b}/{T.unit} closer than the floor")
    return [Fraction(u) / T.unit for u in pts]


# ---------------------------------------------------------------------------
# Whole-orbit sums by composing piecewise translations.
# ---------------------------------------------------------------------------

class OrbitBlocks:
    """``n``-step data of ``T`` as a list of pieces.

    On piece ``[start, end)`` (grid units): ``T^n x = x + shift``,
    ``S_n(zeta, x) = phase / q`` mod 1 and ``S_n(f, zeta, x) = value``.
    ``value`` may be 2-d, one column per function summed simultaneously.
    """

    __slots__ = ("n", "start", "end", "shift", "phase", "value", "q", "total")

    def __init__(self, n, start, end, shift, phase_, value, q, total):
        self.n = n
        self.start, self.end, self.shift = start, end, shift
        self.phase, self.value, self.q, self.total = phase_, value, q, total

    def __len__(self):
        return len(self.start)

    def then(self, other: "OrbitBlocks") -> "OrbitBlocks":
        """Data for ``self.n + other.n`` steps: first ``self``, then ``other``."""
        img_lo = self.start + self.shift
        img_hi = self.end + self.shift
        i0 = np.searchsorted(other.start, img_lo, side="right") - 1
        i1 = np.searchsorted(other.start, img_hi, side="left")
        counts = i1 - i0
        rep = np.repeat(np.arange(len(self)), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        j = i0[rep] + offs
        lo = np.maximum(img_lo[rep], other.start[j]) - self.shift[rep]
        hi = np.minimum(img_hi[rep], other.end[j]) - self.shift[rep]
        ph_a = self.phase[rep]
        if self.q > 1:
            rot = np.exp(2j * np.pi * (ph_a.astype(float) / self.q))
            if self.value.ndim == 2:
                rot = rot[:, None]
            value = self.value[rep] + rot * other.value[j]
        else:
            value = self.value[rep] + other.value[j]
        out = OrbitBlocks(self.n + other.n, lo, hi, self.shift[rep] + other.shift[j],
                          (ph_a + other.phase[j]) % self.q, value, self.q, self.total)
        return out.merged()

    def merged(self) -> "OrbitBlocks":
        """Fuse neighbouring pieces carrying identical data."""
        if len(self) < 2:
            return self
        eq = self.value[1:] == self.value[:-1]
        if eq.ndim == 2:
            eq = eq.all(axis=1)
        same = (self.shift[1:] == self.shift[:-1]) & (self.phase[1:] == self.phase[:-1]) & eq
        if not same.any():
            return self
        keep = np.concatenate(([True], ~same))
        idx = np.flatnonzero(keep)
        ends = np.concatenate((self.end[idx[1:] - 1], self.end[-1:]))
        return OrbitBlocks(self.n, self.start[idx], ends, self.shift[idx], self.phase[idx],
                           self.value[idx], self.q, self.total)

    def sup_abs(self, offset=0.0) -> float:
        """``sup_x |value(x) - offset|``."""
        return float(np.max(np.abs(self.value - offset))) if len(self) else 0.0

    def evaluate(self, u):
        k = int(np.searchsorted(self.start, u, side="right")) - 1
        return self.value[k]


def _int_dtype(*magnitudes):
    return np.int64 if max(magnitudes) < 1 << 62 else object


def base_blocks(T: IetMap, f: Sequence, zeta=None, extra_breakpoints: Sequence = ()) -> OrbitBlocks:
    """One-step data; ``extra_breakpoints`` are grid integers splitting the
    base partition (needed when ``f`` is not constant on the ``I_a``)."""
    z = TwistParameter.zero(T.d) if zeta is None else TwistParameter.from_values(zeta)
    dt = _int_dtype(T.grid_total, z.denominator)
    starts = sorted(set(T._top_starts) | {int(e) for e in extra_breakpoints if 0 < e < T.grid_total})
    ends = starts[1:] + [T.grid_total]
    letters = [T.letter_index(u) for u in starts]
    vals = [f(u, i) if callable(f) else f[i] for u, i in zip(starts, letters)]
    real = z.is_zero() and all(np.isrealobj(np.asarray(v)) for v in vals)
    return OrbitBlocks(
        1,
        np.array(starts, dtype=dt), np.array(ends, dtype=dt),
        np.array([T.grid_delta[i] for i in letters], dtype=dt),
        np.array([z.numerators[i] for i in letters], dtype=dt),
        np.array(vals, dtype=float if real else complex), z.denominator, T.grid_total,
    ).merged()


def blocks_schedule(base: OrbitBlocks, schedule: Sequence[int]):
    """Yield ``(N, blocks)`` for each ``N`` of an increasing schedule, using
    binary powers of the one-step data."""
    powers = [base]
    for N in schedule:
        while (1 << len(powers)) <= N:
            powers.append(powers[-1].then(powers[-1]))
    for N in schedule:
        acc = None
        for j in range(N.bit_length()):
            if N >> j & 1:
                acc = powers[j] if acc is None else acc.then(powers[j])
        yield N, acc


def discrepancy(T: IetMap, J, n: int, method: str = "blocks") -> float:
    """``sup_x |S_n(1_J, x) - n |J| / total|``, exactly.

    ``method='partition'`` evaluates one point per cell of
    :func:`orbit_partition`; ``'blocks'`` composes piecewise translations and
    is much faster for large ``n``. Both are exact.
    """
    a, b = Fraction(J[0]), Fraction(J[1])
    if not 0 <= a < b <= T.total:
        raise ValueError("need 0 <= a < b <= total")
    if n == 0:
        return 0.0
    mean = n * (b - a) / T.total
    ua, ub = a * T.unit, b * T.unit
    if method == "partition":
        cells = orbit_partition(T, n, [a, b])
        best = Fraction(0)
        for x in cells:
            s = 0
            u = T.to_grid_point(x)
            for _ in range(n):
                s += ua <= u < ub
                u = T.step(u)
            best = max(best, abs(s - mean))
        return float(best)
    if ua.denominator != 1 or ub.denominator != 1:
        return discrepancy(T, J, n, method="partition")
    ua, ub = int(ua), int(ub)
    base = base_blocks(T, lambda u, i: 1.0 if ua <= u < ub else 0.0, None, [ua, ub])
    (_, blk), = blocks_schedule(base, [n])
    return _sup_dev(blk, mean)


def _sup_dev(blk: OrbitBlocks, mean: Fraction) -> float:
    # counts are integers held exactly in float64 up to 2^53
    counts = np.unique(blk.value.real.round().astype(np.int64))
    return float(max(abs(Fraction(int(c)) - mean) for c in counts))


def discrepancy_table(T: IetMap, intervals: Sequence, schedule: Sequence[int]) -> np.ndarray:
    """``D[i, k] = D_{J_k}(T, schedule[i])`` for intervals with grid-aligned
    endpoints, all computed in one pass. Counts are exact and each entry is
    the correctly rounded float of the exact supremum."""
    ends = []
    for a, b in intervals:
        ua, ub = Fraction(a) * T.unit, Fraction(b) * T.unit
        if ua.denominator != 1 or ub.denominator != 1:
            raise ValueError("interval endpoints must lie on the grid of T")
        ends.append((int(ua), int(ub)))
    cuts = {u for e in ends for u in e}
    base = base_blocks(T, lambda u, i: np.array([1.0 if a <= u < b else 0.0 for a, b in ends]), None, cuts)
    L = T.grid_total
    out = np.zeros((len(schedule), len(ends)))
    for r, (n, blk) in enumerate(blocks_schedule(base, list(schedule))):
        counts = np.rint(blk.value).astype(np.int64)
        for k, (a, b) in enumerate(ends):
            mean = n * (b - a)
            lo, hi = int(counts[:, k].min()), int(counts[:, k].max())
            out[r, k] = float(Fraction(max(abs(hi * L - mean), abs(lo * L - mean)), L))
    return out


def discrepancy_series(T: IetMap, J, schedule: Sequence[int]) -> list:
    """``[(n, D_J(T, n))]`` over an increasing schedule."""
    a, b = Fraction(J[0]), Fraction(J[1])
    ua, ub = a * T.unit, b * T.unit
    if ua.denominator != 1 or ub.denominator != 1:
        return [(n, discrepancy(T, J, n)) for n in schedule]
    ua, ub = int(ua), int(ub)
    base = base_blocks(T, lambda u, i: 1.0 if ua <= u < ub else 0.0, None, [ua, ub])
    out = []
    for n, blk in blocks_schedule(base, list(schedule)):
        out.append((n, _sup_dev(blk, n * (b - a) / T.total)))
    return out


def compose_power(T: IetMap, p: int, check_irreducible: bool = False) -> IetMap:
    """``T^p`` as a single interval exchange over the refined partition."""
    f = [0] * T.d
    (_, blk), = blocks_schedule(base_blocks(T, f), [p])
    blk = blk.merged()
    starts = [int(s) for s in blk.start]
    ends = [int(e) for e in blk.end]
    shifts = [int(s) for s in blk.shift]
    m = len(starts)
    top = tuple(range(m))
    bottom = tuple(sorted(top, key=lambda i: starts[i] + shifts[i]))
    if check_irreducible:
        perm = validate_permutation(top, bottom)
    else:
        perm = Permutation(top, bottom)
    return IetMap(perm, [e - s for s, e in zip(starts, ends)], T.unit, T.separation_floor)


def twisted_sum_series(T: IetMap, f: Sequence, zeta, schedule: Sequence[int]) -> list:
    """``[(N, sup_x |S_N(f, zeta, x)|)]`` computed exactly cell by cell."""
    base = base_blocks(T, f, zeta)
    return [(N, blk.sup_abs()) for N, blk in blocks_schedule(base, list(schedule))]
