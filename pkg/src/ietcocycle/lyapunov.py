"""Monte-Carlo Lyapunov exponents of the Zorich cocycle and its twisted
deformation.

Each segment draws its own sample from per-segment random streams, so
results do not depend on the number of workers. Lengths are exact integers;
when an orbit gets too close to the separation floor the sample's bits are
extended (prefix-consistently) and the segment is replayed, instead of
throwing the sample away.
"""
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from math import log
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from .combinatorics import Permutation, genus_and_singularities
from .errors import PrecisionExhausted, StepCapExceeded
from .iet import IetMap, TwistParameter, twisted_sum_series
from .renorm import BitStream, SimplexSampler, TorusSampler, col, zorich_step
from .twisted import numeric_phase, push_vector
from .validation import check_config, check_permutation

FIBER_MODES = ("zero", "lebesgue_full", "lebesgue_h_fiber", "rational")
FLOOR_BITS = 38
MAX_REFINEMENTS = 6
MAX_RESAMPLES = 20


@dataclass
class EstimatorConfig:
    orbit_length: int = 2000
    segments: int = 32
    renorm_period: int = 5
    seed: int = 0
    precision_bits: int = 128
    fiber_mode: str = "zero"
    p: Optional[int] = None
    nvec: Optional[tuple] = None
    burn_in: int = 50
    n_jobs: int = 1
    step_cap: int = 10 ** 6

    def __post_init__(self):
        check_config(self)

    def start_bits(self) -> int:
        """Initial bits per sample: the requested precision, raised to what an
        orbit of this length typically consumes."""
        return max(self.precision_bits, 128 + 2 * (self.burn_in + self.orbit_length))


@dataclass
class ExponentEstimate:
    value: float
    stderr: float
    samples: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _aggregate(per_segment: Sequence[float], steps: int, diagnostics: dict) -> ExponentEstimate:
    x = np.asarray(per_segment, dtype=float)
    se = float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
    diagnostics = dict(diagnostics, per_segment=[float(v) for v in x])
    return ExponentEstimate(float(x.mean()), se, steps * len(x), diagnostics)


def _with_refinement(run, bits: int):
    """Call ``run(bits)``; on precision loss double ``bits`` and replay."""
    for attempt in range(MAX_REFINEMENTS + 1):
        try:
            return run(bits), attempt
        except PrecisionExhausted:
            bits *= 2
    raise PrecisionExhausted(f"still short of precision at {bits // 2} bits")


def _resampled(segment, *args):
    """Run ``segment(*args, draw=j)`` for j = 0, 1, ... until no Zorich step
    exceeds the step cap. Returns (value, refinements, redraws)."""
    for draw in range(MAX_RESAMPLES + 1):
        try:
            value, refinements = segment(*args, draw=draw)
            return value, refinements, draw
        except StepCapExceeded:
            continue
    raise StepCapExceeded(f"{MAX_RESAMPLES} redraws all hit the step cap")


def _length_sampler(d: int, cfg, seg: int, draw: int) -> SimplexSampler:
    return SimplexSampler(d, cfg.seed, seg, draw) if draw else SimplexSampler(d, cfg.seed, seg)


def h_frame(perm: Permutation, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random orthonormal ``d x k`` frame inside the real span of H(perm)."""
    H = np.array(genus_and_singularities(perm).h_lattice, dtype=float)
    Q, _ = np.linalg.qr(H)
    coeffs = rng.standard_normal((Q.shape[1], k))
    F, _ = np.linalg.qr(Q @ coeffs)
    return F


def _zorich_segment(perm, k, cfg, seg, frame="h", draw=0):
    d = perm.d
    sampler = _length_sampler(d, cfg, seg, draw)
    rng = np.random.default_rng([cfg.seed, seg, 7])
    if frame == "h":
        V0 = h_frame(perm, k, rng)
    else:
        V0, _ = np.linalg.qr(rng.standard_normal((d, k)))

    def run(bits):
        lam, pi = sampler.lengths(bits), perm
        floor = 1 << FLOOR_BITS
        V = V0.copy()
        for _ in range(cfg.burn_in):
            st = zorich_step(lam, pi, cfg.step_cap, floor)
            st.apply_to_rows(V)
            lam, pi = st.next_lambda, st.next_perm
            if np.abs(V).max() > 1e100:
                V, _ = np.linalg.qr(V)
        V, _ = np.linalg.qr(V)
        logs = np.zeros(k)
        for n in range(1, cfg.orbit_length + 1):
            st = zorich_step(lam, pi, cfg.step_cap, floor)
            st.apply_to_rows(V)
            lam, pi = st.next_lambda, st.next_perm
            if n % cfg.renorm_period == 0 or n == cfg.orbit_length or np.abs(V).max() > 1e100:
                V, R = np.linalg.qr(V)
                logs += np.log(np.abs(np.diag(R)))
        return logs / cfg.orbit_length

    return _with_refinement(run, cfg.start_bits())


def top_exponents_zorich(perm, k: int, cfg: EstimatorConfig, frame: str = "h") -> list:
    """Top ``k`` exponents of the Zorich cocycle on H(perm), per Zorich step."""
    perm = check_permutation(perm)
    g = genus_and_singularities(perm).genus
    if not 1 <= k <= (g if frame == "h" else perm.d):
        raise ValueError(f"k must lie in [1, {g}] for a genus {g} class")
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_resampled)(_zorich_segment, perm, k, cfg, s, frame) for s in range(cfg.segments))
    per_seg = np.array([r[0] for r in results])
    diag = {"refinements": sum(r[1] for r in results), "redraws": sum(r[2] for r in results)}
    return [_aggregate(per_seg[:, i], cfg.orbit_length, dict(diag, index=i + 1))
            for i in range(k)]


def sample_twist(perm: Permutation, cfg: EstimatorConfig, seg: int, bits: int) -> TwistParameter:
    d = perm.d
    mode = cfg.fiber_mode
    if mode == "zero":
        return TwistParameter.zero(d)
    if mode == "lebesgue_full":
        return TorusSampler(d, cfg.seed, seg).twist(bits)
    if mode == "lebesgue_h_fiber":
        basis = genus_and_singularities(perm).h_vectors
        coeffs = [BitStream(cfg.seed, seg, 2000 + i).value(bits) for i in range(len(basis))]
        nums = [sum(c * v[a] for c, v in zip(coeffs, basis)) for a in range(d)]
        return TwistParameter(tuple(nums), 1 << bits)
    if mode == "rational":
        return TwistParameter(tuple(rational_nvec(perm, cfg, seg)), cfg.p)
    raise ValueError(f"unknown fiber mode {mode!r}")


def rational_nvec(perm: Permutation, cfg: EstimatorConfig, seg: int) -> list:
    """The fixed ``nvec``, or a uniformly random nonzero residue vector."""
    if cfg.nvec is not None and cfg.nvec != "all":
        return [int(x) % cfg.p for x in cfg.nvec]
    rng = np.random.default_rng([cfg.seed, seg, 11])
    while True:
        n = [int(x) for x in rng.integers(0, cfg.p, perm.d)]
        if any(n):
            return n


def _twisted_segment(perm, cfg, seg, zeta=None, draw=0):
    d = perm.d
    sampler = _length_sampler(d, cfg, seg, draw)
    rng = np.random.default_rng([cfg.seed, seg, 13])
    f0 = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    f0 /= np.linalg.norm(f0)

    def run(bits):
        lam, pi = sampler.lengths(bits), perm
        z = sample_twist(perm, cfg, seg, bits) if zeta is None else zeta
        floor = 1 << FLOOR_BITS
        f = f0.copy()
        for _ in range(cfg.burn_in):
            st = zorich_step(lam, pi, cfg.step_cap, floor)
            z = push_vector(st, z, f)
            lam, pi = st.next_lambda, st.next_perm
            nf = np.linalg.norm(f)
            f /= nf
        total = 0.0
        for n in range(1, cfg.orbit_length + 1):
            st = zorich_step(lam, pi, cfg.step_cap, floor)
            z = push_vector(st, z, f)
            lam, pi = st.next_lambda, st.next_perm
            if n % cfg.renorm_period == 0 or n == cfg.orbit_length:
                nf = np.linalg.norm(f)
                if nf == 0:
                    return float("-inf")
                total += log(nf)
                f /= nf
        return total / cfg.orbit_length

    return _with_refinement(run, cfg.start_bits())


def top_exponent_twisted(perm, cfg: EstimatorConfig) -> ExponentEstimate:
    """Top exponent of the twisted cocycle, averaged over fiber samples."""
    perm = check_permutation(perm)
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_resampled)(_twisted_segment, perm, cfg, s) for s in range(cfg.segments))
    vals = [r[0] for r in results]
    return _aggregate(vals, cfg.orbit_length,
                      {"refinements": sum(r[1] for r in results), "redraws": sum(r[2] for r in results),
                       "fiber_mode": cfg.fiber_mode})


def fiber_exponent(lengths, perm: Permutation, zeta, f, n_steps: int, renorm_period: int = 5,
                   step_cap: int = 10 ** 6) -> float:
    """Growth rate per Zorich step of the twisted cocycle applied to ``f``
    along one given orbit."""
    z = TwistParameter.from_values(zeta)
    v = np.array(f, dtype=complex)
    if not np.any(v):
        return float("-inf")
    lam, pi = list(lengths), perm
    total = 0.0
    for n in range(1, n_steps + 1):
        st = zorich_step(lam, pi, step_cap)
        z = push_vector(st, z, v)
        lam, pi = st.next_lambda, st.next_perm
        if n % renorm_period == 0 or n == n_steps:
            nv = np.linalg.norm(v)
            if nv == 0:
                return float("-inf")
            total += log(nv)
            v /= nv
    return total / n_steps


@dataclass
class GrowthRecord:
    slope: float
    series: list
    fiber_exponent: float
    height_exponent: float
    zorich_steps: int
    degenerate: bool

    @property
    def exponent_ratio(self) -> float:
        """``beta / chi_1`` measured along the same orbit."""
        return self.fiber_exponent / self.height_exponent


def dyadic_schedule(n_max: int, start: int = 1) -> list:
    out, n = [], start
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


def loglog_slope(series, top_half: bool = True) -> float:
    pts = [(n, s) for n, s in series if s > 0 and n > 0]
    if top_half:
        pts = pts[len(pts) // 2:]
    if len(pts) < 2:
        return float("nan")
    x = np.log([n for n, _ in pts])
    y = np.log([s for _, s in pts])
    return float(np.polyfit(x, y, 1)[0])


SERIES_BITS = 60


def _series_map(ints, perm):
    """IET used for the sum series: the lengths rounded to ``SERIES_BITS`` bits
    so the block engine can stay in int64. Orbits of length ``N`` move by at
    most ``N d 2^-SERIES_BITS``, far below the piece sizes that set the sup."""
    shift = max(0, sum(ints).bit_length() - SERIES_BITS)
    if shift == 0:
        return IetMap(perm, ints, 1)
    return IetMap(perm, [max(1, x >> shift) for x in ints], 1)


def twisted_sum_growth(lengths, perm, zeta, f, n_max: int, orbit_steps: int = 0,
                       floor: int = 0) -> GrowthRecord:
    """Growth of ``sup_x |S_N(f, zeta, x)|`` over dyadic ``N <= n_max``,
    together with the fiber exponent ``beta`` of the twisted cocycle on
    ``f`` and the height growth rate, both per Zorich step along the orbit of
    the same point. The orbit runs until the shortest tower reaches ``n_max``
    and for at least ``orbit_steps`` steps.

    With a zero twist and integer ``f`` the cocycle is applied in exact
    integers, so a mean-zero ``f`` never picks up rounding noise along the top
    direction."""
    perm = check_permutation(perm)
    if n_max < 2 ** 8:
        raise ValueError("n_max must be at least 256")
    from .iet import to_grid

    ints, unit = to_grid(lengths) if not all(isinstance(x, int) for x in lengths) else (list(lengths), 1)
    z = TwistParameter.from_values(zeta)
    top = max(abs(x) for x in f) or 1
    scaled = [float(Fraction(x) / top) if isinstance(x, int) else x / top for x in f]
    series = twisted_sum_series(_series_map(ints, perm), scaled, z, dyadic_schedule(n_max))
    if not any(s > 1e-12 for _, s in series):
        return GrowthRecord(float("-inf"), series, float("-inf"), float("nan"), 0, True)
    slope = loglog_slope(series)
    exact = z.is_zero() and all(isinstance(x, int) for x in f)
    v = list(f) if exact else np.array(f, dtype=complex)
    start = log(max(abs(x) for x in v)) if exact else log(np.linalg.norm(v))
    lam, pi = list(ints), perm
    heights = np.ones(perm.d)
    log_h = 0.0
    scale_v = 0.0
    steps = 0
    while log_h + log(heights.min()) < log(n_max) or steps < orbit_steps:
        try:
            st = zorich_step(lam, pi, floor=floor)
        except ArithmeticError:
            if floor:
                raise
            break
        z = push_vector(st, z, v)
        st.apply_to_vector(heights)
        lam, pi = st.next_lambda, st.next_perm
        steps += 1
        top = heights.max()
        log_h += log(top)
        heights /= top
        if not exact:
            nv = np.linalg.norm(v)
            if nv == 0:
                return GrowthRecord(slope, series, float("-inf"), log_h / steps, steps, False)
            scale_v += log(nv)
            v /= nv
    if steps < 2:
        return GrowthRecord(slope, series, float("-inf"), float("nan"), steps, False)
    if exact:
        nv = max(abs(x) for x in v)
        scale_v = log(nv) if nv else float("-inf")
    return GrowthRecord(slope, series, (scale_v - start) / steps, log_h / steps, steps, False)


@dataclass
class ReturnTime:
    index: int
    balance: float
    heights: list


def balanced_return_times(lengths, perm, window: int, n_steps: int = 200) -> list:
    """Zorich times whose trailing ``window``-step product is positive, with
    ``L = col`` of that product and the tower heights at that time."""
    perm = check_permutation(perm)
    if window < 1:
        raise ValueError("window must be at least 1")
    lam, pi = list(lengths), perm
    if not all(isinstance(x, int) for x in lam):
        from .iet import to_grid

        lam = to_grid(lam)[0]
    d = perm.d
    recent = []
    total = np.eye(d, dtype=object)
    out = []
    for n in range(1, n_steps + 1):
        try:
            st = zorich_step(lam, pi)
        except (PrecisionExhausted, ArithmeticError):
            break
        B = np.array(st.matrix, dtype=object)
        total = B.dot(total)
        recent.append(B)
        recent = recent[-window:]
        lam, pi = list(st.next_lambda), st.next_perm
        if len(recent) == window:
            P = np.eye(d, dtype=object)
            for M in recent:
                P = M.dot(P)
            if all(x > 0 for x in P.flat):
                h = [int(sum(row)) for row in total]
                out.append(ReturnTime(n, col(P.tolist()), h))
    return out


# ---------------------------------------------------------------------------
# Estimator objects
# ---------------------------------------------------------------------------

class ZorichLyapunov(BaseEstimator):
    """Top exponents of the Zorich cocycle; ``fit(perm)`` sets
    ``exponents_`` and ``stderr_``."""

    def __init__(self, n_exponents=1, orbit_length=2000, segments=32, renorm_period=5,
                 burn_in=50, seed=0, precision_bits=128, n_jobs=1):
        self.n_exponents = n_exponents
        self.orbit_length = orbit_length
        self.segments = segments
        self.renorm_period = renorm_period
        self.burn_in = burn_in
        self.seed = seed
        self.precision_bits = precision_bits
        self.n_jobs = n_jobs

    def _config(self, **extra):
        return EstimatorConfig(orbit_length=self.orbit_length, segments=self.segments,
                               renorm_period=self.renorm_period, seed=self.seed,
                               precision_bits=self.precision_bits, burn_in=self.burn_in,
                               n_jobs=self.n_jobs, **extra)

    def fit(self, X, y=None):
        est = top_exponents_zorich(X, self.n_exponents, self._config())
        self.estimates_ = est
        self.exponents_ = np.array([e.value for e in est])
        self.stderr_ = np.array([e.stderr for e in est])
        return self


class TwistedLyapunov(ZorichLyapunov):
    """Top exponent of the twisted cocycle over a chosen fiber measure."""

    def __init__(self, fiber_mode="lebesgue_full", p=None, nvec=None, orbit_length=2000,
                 segments=32, renorm_period=5, burn_in=50, seed=0, precision_bits=128, n_jobs=1):
        super().__init__(1, orbit_length, segments, renorm_period, burn_in, seed, precision_bits, n_jobs)
        self.fiber_mode = fiber_mode
        self.p = p
        self.nvec = nvec

    def fit(self, X, y=None):
        est = top_exponent_twisted(X, self._config(fiber_mode=self.fiber_mode, p=self.p, nvec=self.nvec))
        self.estimate_ = est
        self.exponent_ = est.value
        self.stderr_ = est.stderr
        return self
