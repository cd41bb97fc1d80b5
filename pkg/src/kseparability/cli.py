"""Command-line entry point: ``python -m kseparability <subcommand> ...``.

Exit status is 0 on success, 2 when an input violates an invariant (the
message names it) and 1 on internal errors or a failed ``selfcheck``.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import criteria, measurement, probes, scan, states
from .tensor import SystemDims, ValidationError, load_state, save_state

FAMILY_PARAMS = {"gw": ("alpha", "beta"), "w-noise": ("beta",), "w-antiw": ("a", "b")}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("--out", help="write the main output to this file instead of stdout")
    p.add_argument("--eps", type=float, default=criteria.EPS, help="detection threshold on the margin (default 1e-9)")
    return p


def _state_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="JSON state file (dense 'matrix' or 'ensemble')")
    src.add_argument("--family", choices=sorted(FAMILY_PARAMS), help="built-in qubit family")
    _family_params(p)


def _family_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of qubits for --family")
    p.add_argument("--alpha", type=float, help="GHZ weight (gw)")
    p.add_argument("--beta", type=float, help="W weight (gw, w-noise)")
    p.add_argument("--a", type=float, help="W weight (w-antiw)")
    p.add_argument("--b", type=float, help="anti-W weight (w-antiw)")


def _family_point(args) -> states.FamilyPoint:
    if args.n is None:
        raise ValidationError("--family requires --n")
    names = FAMILY_PARAMS[args.family]
    missing = [nm for nm in names if getattr(args, nm) is None]
    if missing:
        raise ValidationError(f"family {args.family} requires --{' --'.join(missing)}")
    extra = [nm for nm in ("alpha", "beta", "a", "b") if nm not in names and getattr(args, nm) is not None]
    if extra:
        raise ValidationError(f"family {args.family} does not take --{' --'.join(extra)}")
    return states.FamilyPoint(args.family, args.n, tuple(getattr(args, nm) for nm in names))


def _load_rho(args):
    if args.state is not None:
        stray = [nm for nm in ("n", "alpha", "beta", "a", "b") if getattr(args, nm) is not None]
        if stray:
            raise ValidationError(f"--state cannot be combined with --{' --'.join(stray)}")
        return load_state(args.state)
    return states.family_state(_family_point(args))


def _probe_set(spec: str, dims, n_random: int, seed: int) -> list[probes.Probe]:
    if spec == "catalog":
        return probes.catalog(dims, n_random=n_random, seed=seed)
    return [probes.parse_probe(s, dims) for s in spec.split(",")]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# -- subcommands ---------------------------------------------------------------

def cmd_evaluate(args) -> int:
    rho = _load_rho(args)
    probe = probes.parse_probe(args.probe, rho.dims)
    report = criteria.level_k_report(rho, probe, args.k, args.eps)
    _emit(_dump(report.to_dict()), args.out)
    return 0


def cmd_classify(args) -> int:
    rho = _load_rho(args)
    result = criteria.classify(rho, _probe_set(args.probes, rho.dims, args.n_random, args.seed), args.eps)
    _emit(_dump(result.to_dict()), args.out)
    return 0


def cmd_scan(args) -> int:
    dims = SystemDims.qubits(args.n)
    result = scan.grid_scan(
        args.family, args.n, _int_list(args.k), _probe_set(args.probes, dims, args.n_random, args.seed),
        resolution=args.res, eps=args.eps, workers=args.workers,
    )
    scan.emit_csv(result, args.out or sys.stdout)
    return 0


def cmd_threshold(args) -> int:
    if args.n is None:
        raise ValidationError("threshold requires --n")
    names = FAMILY_PARAMS[args.family]
    vary = args.vary or names[-1]
    if vary not in names:
        raise ValidationError(f"--vary must be one of {names} for family {args.family}")
    axis = names.index(vary)
    fixed = []
    for nm in names:
        if nm == vary:
            continue
        val = getattr(args, nm)
        if val is None:
            raise ValidationError(f"--{nm} must be fixed when varying {vary}")
        fixed.append(val)
    probe = probes.parse_probe(args.probe, SystemDims.qubits(args.n))
    curve = scan.family_curve(args.family, args.n, fixed, axis)
    hi = 1.0 - sum(fixed)
    bisected = scan.bisect_threshold(curve, args.k, probe, tol=args.tol, lo=0.0, hi=hi, eps=args.eps)
    out = {"family": args.family, "n": args.n, "k": args.k, "probe": probe.label, "vary": vary,
           "bisected": bisected, "analytic": None, "analytic_fraction": None, "agree": None}
    if args.family == "w-noise" and probe.label == "computational":
        exact = scan.analytic_w_threshold(args.n, args.k)
        out.update(analytic=float(exact), analytic_fraction=str(exact),
                   agree=bool(abs(bisected - float(exact)) <= args.tol))
    _emit(_dump(out), args.out)
    return 0


def cmd_plan(args) -> int:
    dims = _plan_dims(args)
    plan = measurement.settings_plan(probes.parse_probe(args.probe, dims))
    _emit(_dump(plan.to_dict()), args.out)
    return 0


def _plan_dims(args) -> SystemDims:
    if (args.n is None) == (args.dims is None):
        raise ValidationError("give exactly one of --n or --dims")
    return SystemDims.qubits(args.n) if args.n is not None else SystemDims(tuple(_int_list(args.dims)))


def cmd_simulate(args) -> int:
    rho = _load_rho(args)
    plan = measurement.settings_plan(probes.parse_probe(args.probe, rho.dims))
    est = measurement.simulate_shots(rho, plan, args.shots, seed=args.seed)
    rep = measurement.estimated_report(est, args.k, z=args.z, eps=args.eps)
    out = rep.to_dict()
    out.update(shots=args.shots, seed=args.seed)
    _emit(_dump(out), args.out)
    return 0


def cmd_export(args) -> int:
    rho = states.family_state(_family_point(args))
    if not args.out:
        raise ValidationError("export requires --out")
    save_state(rho, args.out)
    return 0


def cmd_selfcheck(args) -> int:
    """Reduced-size versions of the oracle, soundness, threshold and plan checks."""
    rng_seed = args.seed
    results = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")

    def oracle():
        worst = 0.0
        for s in range(args.draws):
            dims = [(2, 2), (2, 2, 2), (2, 3)][s % 3]
            rho = states.random_density(dims, rank=1 + s % 4, seed=rng_seed + s)
            probe = probes.random_probe(dims, rng_seed + 10_000 + s)
            t = criteria.probe_terms(rho, probe)
            o = criteria.two_copy_oracle(rho, probe)
            iu = np.array(t.pairs)
            worst = max(
                worst,
                float(np.max(np.abs(o.lhs_terms[iu[:, 0], iu[:, 1]] - t.offdiag_abs))),
                float(np.max(np.abs(o.pair_terms[iu[:, 0], iu[:, 1]] - np.sqrt(t.phi_diag * t.pair_diag)))),
                float(np.max(np.abs(o.diag_terms - t.single_diag))),
            )
        return worst <= 1e-10, f"max deviation {worst:.2e}"

    def soundness():
        worst = -np.inf
        for n, k in [(3, 2), (3, 3), (4, 2), (4, 3), (4, 4)]:
            dims = SystemDims.qubits(n)
            vecs = [probes.expand(p) for p in probes.catalog(dims, n_random=4, seed=rng_seed)]
            for s in range(args.draws):
                rho = states.random_k_separable(dims, k, components=3, seed=rng_seed + s)
                for v in vecs:
                    worst = max(worst, criteria.level_k_report(rho, v, k).margin)
        return worst <= 1e-9, f"max margin {worst:.2e}"

    def thresholds():
        worst = 0.0
        for n in (3, 4):
            probe = probes.probe_computational(SystemDims.qubits(n))
            for k in range(2, n + 1):
                b = scan.bisect_threshold(scan.family_curve("w-noise", n), k, probe, tol=1e-7)
                worst = max(worst, abs(b - float(scan.analytic_w_threshold(n, k))))
        return worst <= 1e-6, f"max deviation {worst:.2e}"

    def plan_counts():
        bad = [n for n in range(2, 7) if len(measurement.settings_plan(probes.probe_computational(SystemDims.qubits(n))))
               != measurement.settings_count(n)]
        dev = max(measurement.verify_identities(measurement.settings_plan(p)).max_deviation
                  for n in (2, 3) for p in probes.catalog(SystemDims.qubits(n)))
        return not bad and dev <= 1e-12, f"identity deviation {dev:.1e}"

    check("oracle equivalence", oracle)
    check("soundness on random k-separable states", soundness)
    check("W-noise threshold reproduction", thresholds)
    check("measurement plan count and identities", plan_counts)
    return 0 if all(results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="kseparability", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="evaluate the level-k inequality for one probe")
    _state_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--probe", default="computational",
                   help="computational|anticomputational|45|phase-flip|random:<seed>|file:<path>")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", parents=[common], help="smallest detected k for each probe")
    _state_source(p)
    p.add_argument("--probes", default="catalog", help="'catalog' or a comma-separated list of probe specs")
    p.add_argument("--n-random", type=int, default=32, help="random probes added to the catalog (default 32)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", parents=[common], help="grid scan of a family, written as CSV")
    p.add_argument("--family", choices=sorted(FAMILY_PARAMS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", required=True, help="level or comma-separated levels, e.g. 2,3")
    p.add_argument("--res", type=int, default=201, help="grid points per axis (default 201)")
    p.add_argument("--probes", default="catalog")
    p.add_argument("--n-random", type=int, default=32)
    p.add_argument("--workers", type=int, default=None, help="threads (default: $KSEPARABILITY_WORKERS or 1)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("threshold", parents=[common], help="bisected detection threshold along a family")
    p.add_argument("--family", choices=sorted(FAMILY_PARAMS), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--probe", default="computational")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--vary", help="parameter to bisect over (default: the last one)")
    _family_params(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("plan", parents=[common], help="local measurement settings as JSON")
    p.add_argument("--n", type=int, help="number of qubits")
    p.add_argument("--dims", help="comma-separated local dimensions")
    p.add_argument("--probe", default="computational")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="finite-shot estimate of the inequality")
    _state_source(p)
    p.add_argument("--probe", default="computational")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=float, default=3.0, help="confidence factor (default 3)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export", parents=[common], help="write a family state to a JSON state file")
    p.add_argument("--family", choices=sorted(FAMILY_PARAMS), required=True)
    _family_params(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("selfcheck", parents=[common], help="quick oracle/soundness/threshold checks")
    p.add_argument("--draws", type=int, default=30)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
