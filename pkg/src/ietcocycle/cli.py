"""Command line entry point ``ietcocycle``.

Every verb prints a JSON record to stdout (or writes it under ``--out``) and
exits 0 only if all property assertions of the run pass.
"""
import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from . import experiments as ex
from .combinatorics import genus_and_singularities, omega, rauzy_class
from .io import load_config, parse_fraction_list, parse_int_list, perm_text, seeded_orbit, write_jsonl
from .lyapunov import EstimatorConfig, top_exponent_twisted, top_exponents_zorich
from .renorm import SimplexSampler
from .suspension import suspension_report
from .validation import check_permutation

FIBER_FLAGS = {"zero": "zero", "lebesgue": "lebesgue_full", "h-fiber": "lebesgue_h_fiber",
               "rational": "rational"}


def _emit(record: dict, out_dir, name: str) -> None:
    text = json.dumps(record, indent=2, sort_keys=True, default=str)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, name + ".json")
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(path)
    else:
        print(text)


def _status(passed: bool) -> int:
    return 0 if passed else 1


def _config_dict(args) -> dict:
    return load_config(args.config) if getattr(args, "config", None) else {}


def _add_common(sp, perm_default="1234/4321"):
    sp.add_argument("--perm", default=None, help=f"permutation such as '{perm_default}' or 'A B C / C B A'")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--precision-bits", type=int, default=None)
    sp.add_argument("--config", help="JSON or YAML file with keys mirroring the run configuration")
    sp.add_argument("--out", help="directory for artifacts")


def _merge(args, cfg: dict, mapping: dict) -> dict:
    """Flags override config-file keys; unset flags leave them alone."""
    out = dict(cfg)
    for flag, key in mapping.items():
        val = getattr(args, flag, None)
        if val is not None:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

EXPERIMENT_FLAGS = {
    "perm": "perm", "p": "p", "nvec": "nvec", "seed": "seed", "precision_bits": "precision_bits",
    "schedule": "schedule", "n_min": "n_min", "n_max": "n_max", "samples": "samples", "grid": "grid",
    "frequencies": "frequencies", "orbit_length": "orbit_length", "segments": "segments",
    "renorm_period": "renorm_period", "threshold": "threshold", "n_jobs": "n_jobs",
}


def _cmd_experiment(args) -> int:
    data = _merge(args, _config_dict(args), EXPERIMENT_FLAGS)
    if isinstance(data.get("nvec"), str):
        data["nvec"] = parse_int_list(data["nvec"])
    if isinstance(data.get("schedule"), str) and data["schedule"] not in ex.SCHEDULES:
        data["schedule"] = parse_int_list(data["schedule"])
    data["experiment"] = args.command
    if args.out:
        data["output_path"] = args.out
    cfg = ex.RunConfig.from_dict(data)
    sink = None
    partial = None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        partial = os.path.join(args.out, f"{args.command}_{ex.perm_hash(cfg.perm)}_{cfg.seed}.partial.jsonl")
        fh = open(partial, "w")

        def sink(rows):
            write_jsonl(rows, fh)
            fh.flush()
    rec = ex.run(cfg, sink=sink)
    if args.out:
        fh.close()
        for path in rec.write(args.out):
            print(path)
        os.remove(partial)
    else:
        print(rec.summary_json())
    return _status(rec.passed)


# ---------------------------------------------------------------------------
# Lyapunov estimators
# ---------------------------------------------------------------------------

LYAP_FLAGS = {"orbit_length": "orbit_length", "segments": "segments", "renorm_period": "renorm_period",
              "seed": "seed", "precision_bits": "precision_bits", "p": "p", "n_jobs": "n_jobs",
              "burn_in": "burn_in"}


def _estimator_config(args, **extra) -> tuple:
    data = _merge(args, _config_dict(args), LYAP_FLAGS)
    perm = args.perm or data.pop("perm", "1234/4321")
    data.pop("perm", None)
    k = args.k if args.k is not None else data.pop("k", 1)
    data.pop("k", None)
    fiber = data.pop("fiber", None)
    if getattr(args, "fiber", None):
        fiber = args.fiber
    if fiber is not None:
        data["fiber_mode"] = FIBER_FLAGS.get(fiber, fiber)
    nvec = args.nvec if getattr(args, "nvec", None) is not None else data.pop("nvec", None)
    data.pop("nvec", None)
    if isinstance(nvec, str):
        nvec = parse_int_list(nvec) if nvec != "all" else "all"
    if nvec is not None:
        data["nvec"] = tuple(nvec) if nvec != "all" else "all"
    data.update(extra)
    return check_permutation(perm), int(k), EstimatorConfig(**data)


def _segment_csv(path: str, estimates: list) -> None:
    cols = [f"exponent_{i + 1}" for i in range(len(estimates))]
    series = [e.diagnostics["per_segment"] for e in estimates]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment"] + cols)
        for i, vals in enumerate(zip(*series)):
            w.writerow([i] + [format(v, ".17g") for v in vals])


def _cmd_lyapunov(args) -> int:
    perm, k, cfg = _estimator_config(args)
    est = top_exponents_zorich(perm, k, cfg)
    vals = [e.value for e in est]
    checks = {"finite": all(v == v and abs(v) != float("inf") for v in vals),
              "ordered": all(a >= b for a, b in zip(vals, vals[1:])),
              "top_positive": vals[0] > 0}
    record = {"perm": perm_text(perm), "k": k, "config": vars(cfg),
              "estimates": [e.to_dict() for e in est], "checks": checks, "passed": all(checks.values())}
    name = f"lyapunov_{ex.perm_hash(perm)}_{cfg.seed}"
    _emit(record, args.out, name)
    if args.out:
        _segment_csv(os.path.join(args.out, name + ".csv"), est)
    return _status(record["passed"])


def _cmd_twisted_lyapunov(args) -> int:
    perm, _, cfg = _estimator_config(args)
    est = top_exponent_twisted(perm, cfg)
    checks = {"finite": est.value == est.value and abs(est.value) != float("inf"),
              "nonnegative": est.value > -5 * max(est.stderr, 1e-12)}
    record = {"perm": perm_text(perm), "fiber_mode": cfg.fiber_mode, "config": vars(cfg),
              "estimate": est.to_dict(), "checks": checks, "passed": all(checks.values())}
    name = f"twisted-lyapunov_{ex.perm_hash(perm)}_{cfg.seed}"
    _emit(record, args.out, name)
    if args.out:
        _segment_csv(os.path.join(args.out, name + ".csv"), [est])
    return _status(record["passed"])


# ---------------------------------------------------------------------------
# combinatorics and suspensions
# ---------------------------------------------------------------------------

def _cmd_class_info(args) -> int:
    perm = check_permutation(args.perm or "1234/4321")
    diagram = rauzy_class(perm, labelled=args.labelled)
    data = genus_and_singularities(perm)
    checks = {"dimension_formula": perm.d == 2 * data.genus + data.num_singularities - 1,
              "omega_antisymmetric": all(a == -b for ra, rb in zip(omega(perm), zip(*omega(perm)))
                                         for a, b in zip(ra, rb))}
    record = {"perm": perm_text(perm), "d": perm.d, "genus": data.genus,
              "singularities": data.num_singularities, "kernel_dim": data.kernel_dim,
              "omega": [list(r) for r in data.omega], "h_lattice": [list(r) for r in data.h_lattice],
              "class_size": len(diagram.vertices), "checks": checks, "passed": all(checks.values())}
    if args.edges:
        record["diagram"] = diagram.to_dict()
    _emit(record, args.out, f"class-info_{ex.perm_hash(perm)}")
    return _status(record["passed"])


def _cmd_suspension(args) -> int:
    perm = check_permutation(args.perm or "1234/4321")
    if args.lam_hat:
        lam_hat = parse_fraction_list(args.lam_hat)
    else:
        ints = SimplexSampler(perm.d - 1, args.seed or 0, 0).lengths(32)
        lam_hat = [Fraction(x, sum(ints)) for x in ints]
    nvec = parse_int_list(args.nvec)
    rec = suspension_report(lam_hat, perm, nvec, args.p, exact=args.exact)
    rec["perm"] = perm_text(perm)
    rec["lam_hat"] = [str(x) for x in lam_hat]
    _emit(rec, args.out, f"suspension_{ex.perm_hash(perm)}_{args.p}")
    return _status(rec["passed"])


def _cmd_zorich_orbit(args) -> int:
    perm = check_permutation(args.perm or "1234/4321")
    records = seeded_orbit(perm, args.steps, args.seed or 0, args.precision_bits or 256)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"zorich-orbit_{ex.perm_hash(perm)}_{args.seed or 0}.jsonl")
        with open(path, "w") as fh:
            write_jsonl(records, fh)
        print(path)
    else:
        write_jsonl(records, sys.stdout)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ietcocycle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [("discrepancy", "discrepancy of T^p over an N schedule"),
                           ("spectral-dim", "spectral dimension estimates along zeta = s h"),
                           ("kz-ratio", "chi_2 / chi_1 and twisted exponent ratios"),
                           ("positivity", "twisted exponents over rational fibers")]:
        sp = sub.add_parser(name, help=helptext)
        _add_common(sp)
        sp.add_argument("--p", type=int)
        sp.add_argument("--nvec")
        sp.add_argument("--schedule", help="'heights', 'dyadic' or a comma list of N")
        sp.add_argument("--n-min", type=int)
        sp.add_argument("--n-max", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--grid", type=int)
        sp.add_argument("--frequencies", type=int)
        sp.add_argument("--orbit-length", type=int)
        sp.add_argument("--segments", type=int)
        sp.add_argument("--renorm-period", type=int)
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--n-jobs", type=int)
        sp.set_defaults(func=_cmd_experiment)

    for name, func in [("lyapunov", _cmd_lyapunov), ("twisted-lyapunov", _cmd_twisted_lyapunov)]:
        sp = sub.add_parser(name, help="Monte-Carlo Lyapunov exponents")
        _add_common(sp)
        sp.add_argument("--k", type=int)
        sp.add_argument("--segments", type=int)
        sp.add_argument("--orbit-length", type=int)
        sp.add_argument("--renorm-period", type=int)
        sp.add_argument("--burn-in", type=int)
        sp.add_argument("--n-jobs", type=int)
        sp.add_argument("--fiber", choices=sorted(FIBER_FLAGS))
        sp.add_argument("--p", type=int)
        sp.add_argument("--nvec", help="comma list of residues, or 'all' for random nonzero vectors")
        sp.set_defaults(func=func)

    sp = sub.add_parser("suspension", help="stopping-time suspension and cover checks")
    _add_common(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--nvec", required=True)
    sp.add_argument("--lam-hat", help="lengths of the letters other than the last top one, summing to 1")
    sp.add_argument("--exact", action="store_true", help="exact cyclotomic ranks")
    sp.set_defaults(func=_cmd_suspension)

    sp = sub.add_parser("class-info", help="Rauzy class, genus and intersection form")
    _add_common(sp)
    sp.add_argument("--labelled", action="store_true")
    sp.add_argument("--edges", action="store_true", help="include the Rauzy diagram")
    sp.set_defaults(func=_cmd_class_info)

    sp = sub.add_parser("zorich-orbit", help="dump Zorich steps of a seeded random point as JSON lines")
    _add_common(sp)
    sp.add_argument("--steps", type=int, default=20)
    sp.set_defaults(func=_cmd_zorich_orbit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
