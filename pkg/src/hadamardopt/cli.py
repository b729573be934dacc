"""Command-line front end.  Every invocation prints one JSON document.

Exit status: 0 on success, 2 when the command ran but its verdict is
negative (a refuted or unknown certificate, a failed check, a failing
criterion), 1 on errors.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import acceptance
from .classify import (Kind, fn_class_probe, isolated_min_check, necessary_conditions,
                       stationary_scan, strict_min_certificate)
from .config import Settings, load_settings
from .errors import (EmptySubdifferential, GridTooCoarse, HadamardOptError, MissingAnalytic,
                     NotStabilized)
from .funcspace import zero_chain
from .hadamard import consistency_sweep, hadamard_derivative, subdiff_interval_1d
from .oracle import oracle_global_min, oracle_isolated_order, oracle_local_min
from .report import dumps, record, write_csv
from .rivals import bz_second, dini_derivative, ginchev_derivative, lstability_probe
from .sphere import sphere_sample

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(s) for s in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


_VECTOR_OPTIONS = ("--point", "--dir", "--z", "--box", "--radii")


def _attach_vectors(argv: list) -> list:
    """``--box -1,1`` -> ``--box=-1,1``; argparse would read ``-1,1`` as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VECTOR_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _box(text: str) -> list:
    v = _vector(text)
    if len(v) % 2:
        raise UsageError("--box takes pairs lo,hi per axis")
    return [(v[i], v[i + 1]) for i in range(0, len(v), 2)]


def _directions(field_, settings: Settings):
    return sphere_sample(field_.dim, settings.sphere_count, seed=settings.shells.seed)


def _field_point(args, settings):
    f = settings.corpus.get(args.fn)
    x = _vector(args.point)
    if len(x) != f.dim:
        raise UsageError(f"{f.id} takes points in R^{f.dim}, got {len(x)} coordinates")
    return f, x


def cmd_derive(args, settings):
    f, x = _field_point(args, settings)
    u = _vector(args.dir)
    n = args.order
    chain = zero_chain(n)
    if args.chain == "frechet" and n > 1:
        if not f.is_smooth_at(x) or f.analytic_order < n - 1:
            raise MissingAnalytic(f"{f.id} has no Frechet derivatives of order {n - 1} here")
        chain = f.frechet_chain(x, n)
    est = hadamard_derivative(f, x, chain, n, u, settings.shells)
    rec = record("derive", f.id, x, n, settings, est.stabilized, direction=u, chain=args.chain,
                 value=est.value, divergent_neg=est.divergent_neg, last_minimum=est.last_minimum,
                 shell_minima=est.shell_minima, samples_used=est.samples_used)
    return rec, EXIT_OK, [rec]


def cmd_subdiff1d(args, settings):
    f, x = _field_point(args, settings)
    try:
        iv = subdiff_interval_1d(f, x, zero_chain(args.order), args.order, settings.shells)
    except EmptySubdifferential as exc:
        rec = record("subdiff1d", f.id, x, args.order, settings, None, interval=None, empty=True,
                     reason=str(exc))
        return rec, EXIT_NEGATIVE, [rec]
    rec = record("subdiff1d", f.id, x, args.order, settings, True, interval=iv, empty=False,
                 value=str(iv))
    return rec, EXIT_OK, [rec]


def cmd_consistency(args, settings):
    f, x = _field_point(args, settings)
    reps = consistency_sweep(f, x, args.max_order, _directions(f, settings), settings.consistency_tol,
                             settings.shells)
    ok = all(r.passed for r in reps)
    rec = record("consistency", f.id, x, args.max_order, settings, all(r.stabilized for r in reps),
                 values=[r.max_error for r in reps], reports=reps, passed=ok)
    return rec, EXIT_OK if ok else EXIT_NEGATIVE, [r.to_json() for r in reps]


def cmd_compare(args, settings):
    f, x = _field_point(args, settings)
    u = _vector(args.dir)
    z = _vector(args.z) if args.z else np.zeros(f.dim)
    rivals = [r.strip() for r in args.rivals.split(",") if r.strip()]
    unknown = set(rivals) - {"dini", "bz", "ginchev", "hadamard"}
    if unknown:
        raise UsageError(f"unknown rivals {sorted(unknown)}")
    out, stable = {}, []
    if "hadamard" in rivals:
        ests = [hadamard_derivative(f, x, zero_chain(n), n, u, settings.shells)
                for n in range(1, args.max_order + 1)]
        out["hadamard"] = [e.value for e in ests]
        stable += [e.stabilized or e.divergent_neg for e in ests]
    if "dini" in rivals:
        e = dini_derivative(f, x, u, settings.shells)
        out["dini"] = e.value
        stable.append(e.stabilized)
    if "bz" in rivals:
        b = bz_second(f, x, u, z, settings.shells)
        out["bz"] = {"value": b.value, "status": b.status, "z": z}
        stable.append(b.converged)
    if "ginchev" in rivals:
        g = ginchev_derivative(f, x, u, args.max_order, settings.shells)
        out["ginchev"] = g
        stable += [e.stabilized or e.divergent_neg for e in g.estimates if e is not None]
    rec = record("compare", f.id, x, args.max_order, settings, all(stable), direction=u, values=out)
    return rec, EXIT_OK, [rec]


def cmd_probe(args, settings):
    f, x = _field_point(args, settings)
    radii = list(_vector(args.radii)) if args.radii else None
    p = lstability_probe(f, x, radii, cfg=settings.shells)
    rec = record("probe", f.id, x, None, settings, None, kind=args.kind, values=p.khat,
                 profile=p, stable_evidence=p.stable_evidence)
    return rec, EXIT_OK if p.stable_evidence else EXIT_NEGATIVE, [rec]


def cmd_classify(args, settings):
    f, x = _field_point(args, settings)
    U = _directions(f, settings)
    cfg, tol = settings.shells, settings.tolerances
    n = args.order
    if args.test == "necessary":
        vs = necessary_conditions(f, x, args.max_order or n, cfg, tol, U)
        negative = any(v.kind is Kind.NECESSARY_FAIL for v in vs)
        rec = record("classify", f.id, x, args.max_order or n, settings, all(v.evidence.get("stabilized", True) for v in vs),
                     test=args.test, verdicts=vs, kind=[str(v.kind) for v in vs],
                     values=[v.margin for v in vs])
    elif args.test == "fn-class":
        r = fn_class_probe(f, x, n, cfg, tol, U)
        negative = not r.member
        rec = record("classify", f.id, x, n, settings, None, test=args.test, report=r,
                     value=r.alpha_hat, member=r.member)
    else:
        if args.test == "strict":
            v = strict_min_certificate(f, x, args.max_order or n, cfg, tol, U)
        else:
            v = isolated_min_check(f, x, n, cfg, tol, U)
        negative = v.negative
        rec = record("classify", f.id, x, v.order, settings, v.evidence.get("stabilized"),
                     test=args.test, kind=str(v.kind), value=v.margin, verdict=v)
    return rec, EXIT_NEGATIVE if negative else EXIT_OK, [rec]


def cmd_scan(args, settings):
    f = settings.corpus.get(args.fn)
    box = _box(args.box) if args.box else list(f.domain_box)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GridTooCoarse)
        pts = stationary_scan(f, box, args.grid, args.order, settings.shells, settings.tolerances,
                              _directions(f, settings))
    notes = [str(w.message) for w in caught if issubclass(w.category, GridTooCoarse)]
    for msg in notes:
        print(f"warning: {msg}", file=sys.stderr)
    rec = record("scan", f.id, None, args.order, settings, None, box=box, grid=args.grid,
                 values=[p.point for p in pts], points=pts, grid_too_coarse=notes)
    rows = [{"fn": f.id, "order": args.order, "point": list(p.point)} for p in pts]
    return rec, EXIT_OK, rows


def cmd_oracle(args, settings):
    f = settings.corpus.get(args.fn)
    if args.kind == "global":
        box = _box(args.box) if args.box else list(f.domain_box)
        r = oracle_global_min(f, box, args.grid or 201)
        rec = record("oracle", f.id, None, None, settings, None, kind="global", value=r.min_value,
                     report=r, box=box)
        return rec, EXIT_OK, [rec]
    x = _vector(args.point)
    if len(x) != f.dim:
        raise UsageError(f"{f.id} takes points in R^{f.dim}")
    if args.kind == "local":
        r = oracle_local_min(f, x, args.radius, args.grid or 256)
        rec = record("oracle", f.id, x, None, settings, None, kind="local", value=r.is_min, report=r)
        return rec, EXIT_OK if r.is_min else EXIT_NEGATIVE, [rec]
    r = oracle_isolated_order(f, x, args.order, args.radius, args.grid or 256)
    rec = record("oracle", f.id, x, args.order, settings, None, kind="isolated", value=r.c_hat, report=r)
    return rec, EXIT_OK if r.c_hat > 0 else EXIT_NEGATIVE, [rec]


def cmd_suite(args, settings):
    only = [int(s) for s in args.only.split(",")] if args.only else None
    # resolve the function list up front so an unknown id fails before any work
    list(acceptance.soundness_targets(settings))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotStabilized)
        results = acceptance.run_battery(settings, only)
    unstable = sorted({f"criterion {r.number}: {u}" for r in results for u in r.unstable})
    for r in results:
        print(r.line(), file=sys.stderr)
    for u in unstable:
        print(f"warning: stabilized=false for {u}", file=sys.stderr)
    passed = all(r.passed for r in results)
    rec = record("suite", None, None, None, settings, not unstable, criteria=results, passed=passed,
                 values=[r.passed for r in results], warnings=unstable)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed,
             "seconds": round(r.seconds, 3), "budget_seconds": r.budget,
             "unstable": len(r.unstable)} for r in results]
    return rec, EXIT_OK if passed else EXIT_NEGATIVE, rows


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI file with [shells], [sphere], [tolerances], [corpus], [suite]")
    common.add_argument("--seed", type=int, help="override the sampler seed")
    common.add_argument("--csv", metavar="PATH", help="also write a CSV table")

    p = _Parser(prog="hadamardopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, helptext, fn_required=True, point=True):
        s = sub.add_parser(name, help=helptext, parents=[common])
        s.add_argument("--fn", required=fn_required, help="corpus id, optionally with a parameter (id:4)")
        if point:
            s.add_argument("--point", required=True, help="comma-separated coordinates")
        return s

    s = add("derive", "order-n lower Hadamard derivative")
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--dir", required=True)
    s.add_argument("--chain", choices=["zero", "frechet"], default="zero")
    s.set_defaults(func=cmd_derive)

    s = add("subdiff1d", "order-n subdifferential of a function of one variable")
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_subdiff1d)

    s = add("consistency", "compare estimates with Frechet derivatives")
    s.add_argument("--max-order", type=int, required=True)
    s.set_defaults(func=cmd_consistency)

    s = add("compare", "Dini, Ben-Tal-Zowe and Ginchev derivatives side by side")
    s.add_argument("--dir", required=True)
    s.add_argument("--z", help="second-order direction for the parabolic derivative")
    s.add_argument("--rivals", default="dini,bz,ginchev")
    s.add_argument("--max-order", type=int, default=2)
    s.set_defaults(func=cmd_compare)

    s = add("probe", "l-stability probe")
    s.add_argument("--kind", choices=["lstable"], default="lstable")
    s.add_argument("--radii", help="comma-separated decreasing radii")
    s.set_defaults(func=cmd_probe)

    s = add("classify", "optimality verdicts")
    s.add_argument("--test", choices=["necessary", "strict", "isolated", "fn-class"], required=True)
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--max-order", type=int)
    s.set_defaults(func=cmd_classify)

    s = add("scan", "grid scan for stationary points", point=False)
    s.add_argument("--box", help="lo,hi per axis")
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_scan)

    s = add("oracle", "brute-force grid checks", point=False)
    s.add_argument("--point")
    s.add_argument("--kind", choices=["local", "isolated", "global"], required=True)
    s.add_argument("--order", type=int, default=2)
    s.add_argument("--radius", type=float, default=0.5)
    s.add_argument("--grid", type=int)
    s.add_argument("--box")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("suite", help="run the acceptance battery", parents=[common])
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_suite)
    return p


def run(argv=None) -> int:
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        args = build_parser().parse_args(_attach_vectors(argv))
        if args.command == "oracle" and args.kind != "global" and not args.point:
            raise UsageError("oracle --kind local|isolated needs --point")
        settings = load_settings(args.config).with_seed(args.seed)
        doc, code, rows = args.func(args, settings)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (HadamardOptError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(dumps(doc))
    if args.csv:
        write_csv(args.csv, rows)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
