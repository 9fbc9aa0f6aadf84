import json
from fractions import Fraction

import numpy as np
import pytest

from ietcocycle.experiments import (RunConfig, fiber_grid, fit_slope, ks_distance, read_series, run,
                                    summarize_discrepancy, summarize_kz, summarize_positivity,
                                    summarize_spectral, tower_heights)
from ietcocycle.renorm import SimplexSampler
from ietcocycle import parse_permutation

SMALL = {
    "discrepancy": dict(samples=3, grid=4, n_max=2 ** 11),
    "spectral-dim": dict(samples=2, frequencies=6, n_max=2 ** 10, orbit_length=60, segments=4),
    "kz-ratio": dict(orbit_length=150, segments=6),
    "positivity": dict(p=3, samples=2, frequencies=4, orbit_length=60),
}

# summary keys echoed from the estimator rather than derived from the series
ECHOED = {"kz-ratio": {"refinements"}, "spectral-dim": {"chi1_stderr", "chi2_stderr", "roof"}}


def normalise(obj):
    return json.loads(json.dumps(obj, sort_keys=True, default=str))


@pytest.fixture(scope="module")
def records(tmp_path_factory):
    out = {}
    for exp, kw in SMALL.items():
        cfg = RunConfig(experiment=exp, seed=7, **kw)
        rec = run(cfg)
        d = tmp_path_factory.mktemp(exp.replace("-", "_"))
        out[exp] = (cfg, rec, rec.write(str(d)))
    return out


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(experiment="nope")
    with pytest.raises(ValueError):
        RunConfig(experiment="discrepancy", schedule=[4, 4, 8])
    with pytest.raises(ValueError):
        RunConfig(experiment="discrepancy", p=6)
    with pytest.raises(ValueError):
        RunConfig(experiment="kz-ratio", perm="AB/BA")
    with pytest.raises(ValueError):
        RunConfig(experiment="positivity", p=3, nvec=[3, 0, 6, 0])
    with pytest.raises(ValueError):
        RunConfig.from_dict({"experiment": "discrepancy", "samples": 2, "colour": "red"})
    cfg = RunConfig.from_dict({"experiment": "discrepancy", "schedule": [2, 8, 32]})
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_file_names_and_formats(records):
    for exp, (cfg, rec, (csv_path, json_path)) in records.items():
        assert csv_path.endswith(".csv") and json_path.endswith(".json")
        assert exp in csv_path and str(cfg.seed) in csv_path
        with open(json_path) as fh:
            payload = json.load(fh)
        assert payload["config"]["experiment"] == exp
        assert set(payload) >= {"config", "summary", "checks", "passed", "wall_time"}
        header = open(csv_path).readline().strip().split(",")
        assert header == rec.columns


def test_summaries_recomputable_from_csv(records):
    genus2 = 2
    for exp, (cfg, rec, (csv_path, _)) in records.items():
        rows = read_series(csv_path)
        if exp == "discrepancy":
            summary, checks = summarize_discrepancy(rows, genus2, cfg.min_points)
        elif exp == "spectral-dim":
            summary, checks = summarize_spectral(rows)
        elif exp == "kz-ratio":
            summary, checks = summarize_kz(rows, True)
        else:
            summary, checks = summarize_positivity(rows, genus2, cfg.threshold)
        want = {k: v for k, v in rec.summary.items() if k not in ECHOED.get(exp, set())}
        assert normalise(summary) == normalise(want)
        assert checks == rec.checks


def test_discrepancy_slopes_by_hand(records):
    """Independent recomputation of the per-sample sup slope from the CSV."""
    cfg, rec, (csv_path, _) = records["discrepancy"]
    rows = read_series(csv_path)
    for entry in rec.summary["per_sample"]:
        mine = [r for r in rows if int(r["sample"]) == entry["sample"]]
        ns = sorted({int(r["n"]) for r in mine})
        sup = [max(float(r["D"]) for r in mine if int(r["n"]) == n) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(sup), 1)[0]
        assert slope == pytest.approx(entry["sup_slope"], rel=1e-12)
    # the full interval never deviates from its mean
    assert all(float(r["D"]) == 0 for r in rows if r["a"] == "0/4" and r["b"] == "4/4")


def test_byte_identical_reruns(records):
    for exp in ("discrepancy", "positivity"):
        cfg, rec, _ = records[exp]
        again = run(RunConfig(**cfg.to_dict()))
        assert again.csv_text() == rec.csv_text()


def test_parallel_matches_serial(records):
    cfg, rec, _ = records["discrepancy"]
    par = run(RunConfig(**{**cfg.to_dict(), "n_jobs": 2}))
    assert par.csv_text() == rec.csv_text()


def test_spectral_rows(records):
    _, rec, _ = records["spectral-dim"]
    kinds = [r["kind"] for r in rec.series]
    assert kinds.count("grid") == 12 and kinds.count("zero_constant") == 2
    for r in rec.series:
        assert 0 <= r["d_hat"] <= 2
        if r["kind"] == "zero_constant":
            assert r["degenerate"] and r["d_hat"] == 0
        if r["kind"] == "grid":
            assert 0 < Fraction(r["s"]) < 1
    assert rec.checks["constant_degenerate"]


def test_positivity_excludes_zero(records):
    _, rec, _ = records["positivity"]
    assert rec.checks["zero_excluded"]
    assert all(any(int(x) for x in r["nvec"].split()) for r in rec.series)
    assert rec.summary["fraction_positive"] > 0


def test_kz_small_run_checks(records):
    _, rec, _ = records["kz-ratio"]
    s = rec.summary
    assert s["segments"] == 6
    assert 0 < s["twisted_full_over_chi1"] < 0.5 + 3 * s["twisted_full_over_chi1_stderr"]


def test_discrepancy_control_flat():
    rec = run(RunConfig(experiment="discrepancy", perm="AB/BA", samples=6, grid=4, n_max=2 ** 12, seed=2))
    assert rec.summary["role"] == "control"
    s = rec.summary
    assert s["mean_sup_slope"] <= 0.02 + 2 * s["stderr_sup_slope"]


def test_positivity_control_null():
    rec = run(RunConfig(experiment="positivity", perm="AB/BA", p=3, samples=2, orbit_length=200))
    assert rec.summary["fraction_positive"] == 0 and rec.checks["control_null"]


@pytest.mark.xfail(strict=True, reason="per-point fiber exponents fluctuate like L^-1/2, so the KS distance "
                                       "between the L and 2L histograms does not shrink with L")
def test_positivity_ks_doubling():
    rec = run(RunConfig(experiment="positivity", p=3, samples=2, orbit_length=300, seed=1))
    assert rec.checks["ks_stable"]


def test_helpers():
    assert fit_slope([1, 2, 4], [0, 0, 0]) == 0.0
    assert fit_slope([1, 2, 4, 8], [3, 6, 12, 24]) == pytest.approx(1.0)
    assert ks_distance([0, 1, 2], [0, 1, 2]) == 0
    g = fiber_grid(2, 3, 100, 0)
    assert len(g) == 8 and [0, 0] not in g
    g = fiber_grid(4, 5, 30, 0)
    assert len(g) == 30 == len({tuple(x) for x in g}) and all(any(x) for x in g)
    perm = parse_permutation("1234/4321")
    hs = tower_heights(SimplexSampler(4, 0, 0).lengths(80), perm, 10, 1000)
    assert hs == sorted(set(hs)) and all(10 <= h <= 1000 for h in hs)
