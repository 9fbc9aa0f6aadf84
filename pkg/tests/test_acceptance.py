"""The ten acceptance criteria, each at its stated tolerance and time limit.

Every test prints one ``criterion N: PASS|FAIL`` line to the terminal.
"""
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from ietcocycle import EstimatorConfig, build_iet, genus_and_singularities, parse_permutation
from ietcocycle.combinatorics import all_rauzy_classes, irreducible_permutations, omega
from ietcocycle.experiments import RunConfig, run
from ietcocycle.lyapunov import top_exponents_zorich
from ietcocycle.renorm import SimplexSampler, TorusSampler, path_product, zorich_orbit
from ietcocycle.suspension import (birkhoff_conjugacy_check, build_suspension, cover_check, residue_grid,
                                   shaped_permutations, stopping_time, suspension_report, surface_profile,
                                   x_lengths)
from ietcocycle.twisted import determinant, mpmath_phase, twisted_orbit_product, twisted_zorich_step
from ietcocycle.iet import TwistParameter

pytestmark = pytest.mark.slow

REFERENCE = parse_permutation("1234/4321")


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, t0, limit):
        elapsed = time.time() - t0
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.1f} s, limit {limit:.0f} s)")
        return ok
    return emit


def simplex_point(d, seed, idx, bits=40):
    ints = SimplexSampler(d, seed, idx).lengths(bits)
    return [Fraction(x, sum(ints)) for x in ints]


def test_criterion_1_combinatorial_identities(report):
    """Genus from the rank of Omega; the number of cone points from the
    zippered polygon surface, a geometric route independent of Omega."""
    t0 = time.time()
    bad = []
    count = 0
    for d in range(2, 6):
        for D in all_rauzy_classes(d):
            genera = set()
            for perm in D.vertices:
                count += 1
                W = sympy.Matrix(omega(perm))
                if W.T != -W:
                    bad.append((perm, "antisymmetry"))
                g = W.rank() // 2
                lam = [Fraction(k + 1, 7) + Fraction(1, 3 ** (k + 2)) for k in range(d)]
                kappa = len(surface_profile(build_iet(lam, perm)).orders)
                if d != 2 * g + kappa - 1 or genus_and_singularities(perm).genus != g:
                    bad.append((perm, g, kappa))
                genera.add(g)
            if len(genera) != 1:
                bad.append((D, "genus not constant on class"))
    covered = sum(len(D.vertices) for d in range(2, 6) for D in all_rauzy_classes(d))
    total = sum(1 for d in range(2, 6) for _ in irreducible_permutations(d))
    ok = report(1, not bad and covered >= total, f"{count} permutations, d <= 5, failures {len(bad)}", t0, 60)
    assert ok, bad[:5]


def test_criterion_2_induction_identity(report):
    t0 = time.time()
    rng = np.random.default_rng(2)
    perms = {d: list(irreducible_permutations(d)) for d in range(2, 6)}
    worst = Fraction(0)
    for i in range(1000):
        d = int(rng.integers(2, 6))
        perm = perms[d][int(rng.integers(len(perms[d])))]
        k = int(rng.integers(1, 31))
        lam = SimplexSampler(d, 2, i).lengths(128)
        steps = list(zorich_orbit(lam, perm, k))
        B = path_product(steps)
        end = steps[-1].next_lambda
        back = [sum(end[r] * B[r][c] for r in range(d)) for c in range(d)]
        err = max(abs(Fraction(a - b, sum(lam))) for a, b in zip(back, lam))
        worst = max(worst, err)
    ok = report(2, worst < Fraction(1, 2 ** 60), f"1000 orbits of <= 30 steps, max error {float(worst):.1e}",
                t0, 60)
    assert ok


def test_criterion_3_twisted_reduction(report):
    t0 = time.time()
    zero_ok, det_err, step_err = True, 0.0, 0.0
    perms = [REFERENCE, parse_permutation("12345/54321"), parse_permutation("123/321"),
             parse_permutation("12345/53421")]
    e = mpmath_phase(1200)
    for i, perm in enumerate(perms):
        lam = SimplexSampler(perm.d, 3, i).lengths(2600)
        steps = list(zorich_orbit(lam, perm, 1000))
        M0, _ = twisted_orbit_product(lam, perm, [0] * perm.d, 1000)
        zero_ok &= [list(r) for r in M0.entries] == path_product(steps)
        zeta = TorusSampler(perm.d, 3, i).twist(64)
        z = zeta
        for st in steps:
            Mz, z = twisted_zorich_step(st, z)
            step_err = max(step_err, abs(abs(complex(determinant(Mz.entries))) - 1))
        M, _ = twisted_orbit_product(lam, perm, zeta, 1000, e)
        det_err = max(det_err, float(abs(abs(determinant(M.entries, e.ctx)) - 1)))
    ok = zero_ok and det_err < 2 ** -40 and step_err < 2 ** -40
    ok = report(3, ok, f"zero twist exact: {zero_ok}; |det|-1 over 1000 steps {det_err:.1e}, "
                       f"per step {step_err:.1e}", t0, 60)
    assert ok


def test_criterion_4_exponent_ratio(report):
    t0 = time.time()
    cfg = EstimatorConfig(orbit_length=2000, segments=500, seed=2024)
    e1, e2 = top_exponents_zorich(REFERENCE, 2, cfg)
    r = e2.value / e1.value
    ok = report(4, 0.28 <= r <= 0.38, f"chi2/chi1 = {r:.4f} (chi1 {e1.value:.4f} +- {e1.stderr:.4f}, "
                                      f"{cfg.orbit_length * cfg.segments} Zorich steps)", t0, 600)
    assert ok


def test_criterion_5_twisted_exponent(report):
    t0 = time.time()
    rec = run(RunConfig(experiment="kz-ratio", orbit_length=2000, segments=32, seed=5))
    s, c = rec.summary, rec.checks
    ok = c["twisted_full_positive"] and c["twisted_full_half_bound"]
    ok = report(5, ok, f"twisted/chi1 = {s['twisted_full_over_chi1']:.3f} +- "
                       f"{s['twisted_full_over_chi1_stderr']:.3f}, twisted = {s['mean']['twisted_full']:.4f} +- "
                       f"{s['stderr']['twisted_full']:.4f}; h-fiber ratio {s['twisted_h_over_chi1']:.3f}",
                t0, 900)
    assert ok


def suspension_grid():
    for d in (2, 3, 4):
        for i, perm in enumerate(shaped_permutations(d)):
            lam_hat = simplex_point(d - 1, 6, i) if d > 2 else [Fraction(1)]
            for p in (3, 5, 7):
                for nvec in residue_grid(perm, p):
                    yield perm, lam_hat, p, nvec


def test_criterion_6_suspension_suite(report):
    t0 = time.time()
    cases, failures = 0, []
    for perm, lam_hat, p, nvec in suspension_grid():
        cases += 1
        rep = suspension_report(lam_hat, perm, nvec, p, exact=True)
        S = build_suspension(x_lengths(lam_hat, perm, p), perm, nvec, p)
        mids = [Fraction(iv.start + iv.end, 2 * S.base.unit) for iv in S.intervals]
        direct = max(stopping_time(S.base, nvec, p, x) for x in mids) <= 2 * p - 1
        checks = {k: v for k, v in rep["checks"].items() if k != "cover_verdict"}
        if not (direct and all(checks.values())):
            failures.append((perm, p, nvec, checks))
    ok = report(6, not failures, f"{cases} cases (d <= 4, p in 3,5,7), failures {len(failures)}", t0, 300)
    assert ok, failures[:3]


def test_criterion_7_birkhoff_conjugacy(report):
    t0 = time.time()
    rng = np.random.default_rng(7)
    perms = [perm for d in (2, 3, 4) for perm in shaped_permutations(d)]
    failures = 0
    for i in range(1000):
        perm = perms[int(rng.integers(len(perms)))]
        p = int(rng.choice([3, 5, 7]))
        t = perm.index(perm.last_top)
        nvec = [int(x) for x in rng.integers(0, p, perm.d)]
        nvec[t] = int(rng.integers(1, p))
        lam_hat = simplex_point(perm.d - 1, 7, i) if perm.d > 2 else [Fraction(1)]
        S = build_suspension(x_lengths(lam_hat, perm, p), perm, nvec, p)
        f = list(rng.standard_normal(perm.d) + 1j * rng.standard_normal(perm.d))
        k = int(rng.integers(0, p))
        x = Fraction(int(rng.integers(0, 2 ** 40)), 2 ** 40)
        ell = int(rng.integers(0, 101))
        failures += not birkhoff_conjugacy_check(S, f, k, x, ell, tol=2.0 ** -40)
    ok = report(7, failures == 0, f"1000 random (f, k, x, l <= 100), failures {failures}", t0, 60)
    assert ok


def test_criterion_8_surface_lemmas(report):
    t0 = time.time()
    cases, failures = 0, []
    for perm, lam_hat, p, nvec in suspension_grid():
        cases += 1
        rep = cover_check(lam_hat, perm, nvec, p)
        ok = (rep.genus_bound and rep.order_lifting and rep.x.gauss_bonnet() and rep.y.gauss_bonnet()
              and rep.x.genus == rep.x.omega_genus and rep.y.genus == rep.y.omega_genus)
        if not ok:
            failures.append((perm, p, nvec, rep.to_dict()))
    ok = report(8, not failures, f"{cases} cases: genus bound, order lifting, Gauss-Bonnet, Omega genus; "
                                 f"failures {len(failures)}", t0, 300)
    assert ok, failures[:3]


def test_criterion_9_discrepancy(report):
    t0 = time.time()
    test = run(RunConfig(experiment="discrepancy", p=5, seed=0))
    control = run(RunConfig(experiment="discrepancy", perm="12/21", p=5, seed=0, samples=40))
    s, c = test.summary, control.summary
    ok = s["fraction_above"] > 0.5 and c["mean_sup_slope"] <= 0.02
    ok = report(9, ok, f"genus 2: {s['fraction_above']:.0%} of samples with slope > 0.05 "
                       f"(mean {s['mean_sup_slope']:.3f}); d=2 control mean slope {c['mean_sup_slope']:.4f} "
                       f"+- {c['stderr_sup_slope']:.4f}", t0, 600)
    assert ok


def test_criterion_10_spectral_dimension(report):
    t0 = time.time()
    rec = run(RunConfig(experiment="spectral-dim", seed=0))
    s = rec.summary
    ok = report(10, s["band_mass"] >= 0.9, f"mass in [0.85, 2] = {s['band_mass']:.2f} over "
                                           f"{rec.config['frequencies'] * rec.config['samples']} frequencies "
                                           f"(mean d = {s['mean_d_hat']:.3f})", t0, 900)
    assert ok
