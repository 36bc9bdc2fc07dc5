"""``localtime`` command-line interface.

Every invocation prints self-describing records, one per line: the
operation, its parameters, the engine that produced the result and the
result itself. Exit status is 0 on success, 2 for invalid input and 3 for a
computational failure (including a failed ``--verify`` cross-check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import asymptotics, closed_forms, local_time_exact as exact, montecarlo, resolvent_zdomain as zdom
from .errors import ComputationError, InputValidationError, UnreachableEndpoint
from .graph_model import FREE, EnsembleSpec, Fixed, load_graph, transition_to_json

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3
VERIFY_TOL = 1e-8


class VerificationFailed(ComputationError):
    pass


# --- argument parsing -------------------------------------------------------

def _common(p, *fields):
    p.add_argument("--graph", required=True, help="graph file (.json or .csv adjacency)")
    p.add_argument("--va", type=int, default=0, help="starting vertex")
    if "endpoint" in fields:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--vb", type=int, help="fixed final vertex")
        g.add_argument("--endpoint", choices=["free"], help="leave the final vertex free (default)")
    if "v1" in fields:
        p.add_argument("--v1", type=int, required=True)
    if "v2" in fields:
        p.add_argument("--v2", type=int, required=True)
    if "v" in fields:
        p.add_argument("--v", type=int, required=True, help="vertex whose local time is studied")
    if "n" in fields:
        p.add_argument("--n", type=int, required=True, help="number of steps")


def _output(p):
    p.add_argument("--format", choices=["json", "csv"], default="json")


def _zmode(p):
    p.add_argument("--z", type=float, help="evaluate the z-transform at this z > 1 instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localtime", description="Local-time statistics of random walks on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="mean local time <L(v1)>")
    _common(p, "endpoint", "v1", "n")
    _zmode(p)
    _output(p)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("corr", help="correlation <L(v1) L(v2)>")
    _common(p, "endpoint", "v1", "v2", "n")
    _zmode(p)
    _output(p)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("dist", help="distribution of L(v)")
    _common(p, "endpoint", "v", "n")
    _output(p)
    p.add_argument("--lmax", type=int, help="largest local time tabulated (default n)")
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("zero-visit", help="probability that v is never visited")
    _common(p, "endpoint", "v", "n")
    _zmode(p)
    _output(p)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("stationary", help="invariant distribution")
    p.add_argument("--graph", required=True)
    p.add_argument("--verify", action="store_true", help="cross-check with final-value extrapolation")
    _output(p)

    p = sub.add_parser("limit-fraction", help="limit of <L(v1)>/n, or of <L(v1)L(v2)>/n^2 with --v2")
    p.add_argument("--graph", required=True)
    p.add_argument("--va", type=int, default=0, help="start used by --verify")
    p.add_argument("--v1", type=int, required=True)
    p.add_argument("--v2", type=int)
    p.add_argument("--verify", action="store_true")
    _output(p)

    p = sub.add_parser("resolvent", help="<va|R|vb> at z, optionally deformed by e^u at v")
    p.add_argument("--graph", required=True)
    p.add_argument("--va", type=int, required=True)
    p.add_argument("--vb", type=int, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--u", type=float, help="source strength for the one-point deformation")
    p.add_argument("--v", type=int, help="deformed vertex (with --u)")
    p.add_argument("--verify", action="store_true")
    _output(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    sim = p.add_subparsers(dest="quantity", required=True)
    for name, fields in (("mean", ("v1",)), ("corr", ("v1", "v2")), ("dist", ("v",)), ("zero-visit", ("v",))):
        q = sim.add_parser(name)
        _common(q, "endpoint", "n", *fields)
        if name == "dist":
            q.add_argument("--l", type=int, required=True, help="local-time value")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--trials", type=int, default=100_000)
        q.add_argument("--verify", action="store_true", help="check the exact value lies within 4 standard errors")
        _output(q)

    p = sub.add_parser("closed-form", help="analytic results for complete, star and line graphs")
    fam = p.add_subparsers(dest="family", required=True)
    q = fam.add_parser("complete")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--quantity", choices=["resolvent", "mean"], required=True)
    q.add_argument("--z", type=float)
    q.add_argument("--va", type=int, default=0)
    q.add_argument("--vb", type=int, default=0)
    q.add_argument("--n", type=int)
    q.add_argument("--at-start", action="store_true")
    _output(q)
    q = fam.add_parser("star")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--quantity", choices=["resolvent"], default="resolvent")
    q.add_argument("--z", type=float, required=True)
    _output(q)
    q = fam.add_parser("line")
    q.add_argument("--quantity", choices=["resolvent", "zero-visit", "distribution"], required=True)
    q.add_argument("--z", type=float)
    q.add_argument("--delta", type=int, default=0)
    q.add_argument("--n", type=int)
    q.add_argument("--l", type=int, default=0)
    _output(q)

    p = sub.add_parser("export", help="write a graph as stochastic-mode JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--family", choices=["complete", "star", "line"])
    p.add_argument("--N", type=int, help="size for complete/star")
    p.add_argument("--radius", type=int, help="window radius for line")
    p.add_argument("--out", help="output path (default stdout)")
    return parser


# --- helpers ----------------------------------------------------------------

def _endpoint(args):
    return Fixed(args.vb) if getattr(args, "vb", None) is not None else FREE


def _echo(args) -> dict:
    skip = {"format", "verify"}
    return {k: v for k, v in vars(args).items() if v is not None and k not in skip and v is not False}


def _record(args, engine, result, **extra):
    rec = {"operation": args.command, "params": _echo(args), "engine": engine, "result": result}
    rec.update(extra)
    return rec


def _fixed_pair(value, P, va, endpoint, n, err):
    """Unnormalized and normalized values for a fixed endpoint; plain value when free."""
    if not isinstance(endpoint, Fixed):
        return value
    try:
        norm = exact.normalize_fixed(value, P, va, endpoint.vb, n)
    except UnreachableEndpoint as exc:
        err.write(f"warning: {exc}\n")
        norm = None
    return {"unnormalized": value, "normalized": norm}


def _compare(label, a, b, tol=VERIFY_TOL):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    gap = float(np.max(np.abs(a - b))) if a.size else 0.0
    if not gap <= tol:
        raise VerificationFailed(f"{label}: engines disagree by {gap:.3e} (> {tol:g})")
    return {"verified": True, "max_discrepancy": gap}


# --- commands ---------------------------------------------------------------

def _pointwise(args, err, exact_fn, z_fn):
    P = load_graph(args.graph)
    endpoint = _endpoint(args)
    if args.z is not None:
        value = z_fn(P, endpoint, z=args.z)
        return [_record(args, "zdomain-numeric", value)]
    value = exact_fn(P, endpoint)
    extra = {}
    if args.verify:
        series = z_fn(P, endpoint, order=args.n).coefficient(args.n)
        extra = _compare(args.command, value, series)
    return [_record(args, "exact", _fixed_pair(value, P, args.va, endpoint, args.n, err), **extra)]


def cmd_mean(args, err):
    return _pointwise(
        args, err,
        lambda P, e: exact.mean_local_time(P, args.va, e, args.v1, args.n),
        lambda P, e, **kw: zdom.mean_z(P, args.va, e, args.v1, **kw),
    )


def cmd_corr(args, err):
    return _pointwise(
        args, err,
        lambda P, e: exact.correlation(P, args.va, e, args.v1, args.v2, args.n),
        lambda P, e, **kw: zdom.correlation_z(P, args.va, e, args.v1, args.v2, **kw),
    )


def cmd_zero_visit(args, err):
    return _pointwise(
        args, err,
        lambda P, e: exact.zero_visit_probability(P, args.va, e, args.v, args.n),
        lambda P, e, **kw: zdom.zero_visit_z(P, args.va, e, args.v, **kw),
    )


def cmd_dist(args, err):
    P = load_graph(args.graph)
    endpoint = _endpoint(args)
    table = exact.local_time_distribution_exact(P, args.va, endpoint, args.v, args.n, args.lmax)
    extra = {}
    if args.verify:
        top = table.lmax - 1 if table.saturated else table.lmax
        series = [zdom.distribution_z(P, args.va, endpoint, args.v, ell, order=args.n).coefficient(args.n)
                  for ell in range(top + 1)]
        extra = _compare("dist", table.mass[: top + 1], series)
    rows = []
    norm = None
    if isinstance(endpoint, Fixed):
        try:
            norm = table.normalized()
        except UnreachableEndpoint as exc:
            err.write(f"warning: {exc}\n")
    for ell, m in enumerate(table.mass):
        row = {"l": ell, "mass": float(m)}
        if isinstance(endpoint, Fixed):
            row = {"l": ell, "unnormalized": float(m), "normalized": None if norm is None else float(norm[ell])}
        rows.append(row)
    return [_record(args, "exact", rows, saturated=table.saturated, **extra)]


def cmd_stationary(args, err):
    P = load_graph(args.graph)
    pi = asymptotics.invariant_distribution(P).pi
    extra = {}
    if args.verify:
        alt = [asymptotics.limiting_fraction_by_extrapolation(P, 0, v) for v in range(P.size)]
        extra = _compare("stationary", pi, alt, tol=1e-6)
    rows = [{"vertex": v, "pi": float(p)} for v, p in enumerate(pi)]
    return [_record(args, "exact", rows, **extra)]


def cmd_limit_fraction(args, err):
    P = load_graph(args.graph)
    if args.v2 is None:
        value = asymptotics.limiting_local_time_fraction(P, args.v1)
        alt = (lambda: asymptotics.limiting_fraction_by_extrapolation(P, args.va, args.v1))
    else:
        value = asymptotics.limiting_pair_fraction(P, args.v1, args.v2)
        alt = (lambda: asymptotics.limiting_pair_by_extrapolation(P, args.va, args.v1, args.v2))
    extra = _compare("limit-fraction", value, alt(), tol=1e-6) if args.verify else {}
    return [_record(args, "exact", value, **extra)]


def cmd_resolvent(args, err):
    P = load_graph(args.graph)
    if (args.u is None) != (args.v is None):
        raise InputValidationError("--u and --v must be given together")
    if args.u is None:
        value = zdom.resolvent_element(P, args.z, args.va, args.vb)
        deform = np.eye(P.size)
    else:
        value = zdom.deformed_resolvent_element(P, args.z, args.v, args.u, args.va, args.vb)
        deform = np.eye(P.size)
        deform[args.v, args.v] = math.exp(args.u)
    extra = {}
    if args.verify:
        direct = np.linalg.inv(np.asarray(P) @ deform - args.z * np.eye(P.size))[args.va, args.vb]
        extra = _compare("resolvent", value, direct)
    return [_record(args, "zdomain-numeric", value, **extra)]


def cmd_simulate(args, err):
    P = load_graph(args.graph)
    endpoint = _endpoint(args)
    spec = EnsembleSpec(args.va, args.n, endpoint)
    config = montecarlo.SimulationConfig(args.seed, args.trials, spec)
    q = args.quantity
    if q == "mean":
        functional = montecarlo.Mean(args.v1)
        reference = lambda: exact.mean_local_time(P, args.va, endpoint, args.v1, args.n)
    elif q == "corr":
        functional = montecarlo.Product(args.v1, args.v2)
        reference = lambda: exact.correlation(P, args.va, endpoint, args.v1, args.v2, args.n)
    elif q == "dist":
        functional = montecarlo.Indicator(args.v, args.l)
        reference = lambda: (exact.local_time_distribution_exact(P, args.va, endpoint, args.v, args.n).mass[args.l]
                             if 0 <= args.l <= args.n else 0.0)
    else:
        functional = montecarlo.ZeroVisit(args.v)
        reference = lambda: exact.zero_visit_probability(P, args.va, endpoint, args.v, args.n)
    est = montecarlo.estimate(P, config, functional)
    result = {"mean": est.mean, "standard_error": est.standard_error, "trials_used": est.trials_used}
    extra = {}
    if args.verify:
        ref = reference()
        if isinstance(endpoint, Fixed):
            ref = exact.normalize_fixed(ref, P, args.va, endpoint.vb, args.n)
        if not est.contains(ref, 4.0):
            raise VerificationFailed(f"exact value {ref!r} outside mean +/- 4 standard errors")
        extra = {"verified": True, "exact": ref}
    return [_record(args, "montecarlo", result, **extra)]


def cmd_closed_form(args, err):
    fam, q = args.family, args.quantity
    if fam == "complete":
        if q == "resolvent":
            _need(args, "z")
            value = closed_forms.complete_resolvent(args.N, args.z, args.va, args.vb)
        else:
            _need(args, "n")
            value = closed_forms.complete_mean_local_time(args.N, args.n, args.at_start)
        return [_record(args, "closed-form", value)]
    if fam == "star":
        r = closed_forms.star_resolvent(args.N, args.z)
        return [_record(args, "closed-form", r.tolist())]
    if q == "resolvent":
        _need(args, "z")
        value = closed_forms.line_resolvent(args.z, args.delta)
    elif q == "zero-visit":
        _need(args, "n")
        value = closed_forms.line_zero_visit(args.n)
    else:
        _need(args, "z")
        value = closed_forms.line_distribution_z(args.l, args.z)
    return [_record(args, "closed-form", value)]


def _need(args, name):
    if getattr(args, name) is None:
        raise InputValidationError(f"--{name} is required for this quantity")


def cmd_export(args, err, out):
    if args.graph:
        P = load_graph(args.graph)
    elif args.family == "line":
        _need(args, "radius")
        P = closed_forms.LineWindow(args.radius).matrix()
    else:
        _need(args, "N")
        P = closed_forms.complete_graph(args.N) if args.family == "complete" else closed_forms.star_graph(args.N)
    text = json.dumps(transition_to_json(P)) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


COMMANDS = {
    "mean": cmd_mean,
    "corr": cmd_corr,
    "dist": cmd_dist,
    "zero-visit": cmd_zero_visit,
    "stationary": cmd_stationary,
    "limit-fraction": cmd_limit_fraction,
    "resolvent": cmd_resolvent,
    "simulate": cmd_simulate,
    "closed-form": cmd_closed_form,
}


# --- output -----------------------------------------------------------------

def _csv(records) -> str:
    buf = io.StringIO()
    for rec in records:
        result = rec["result"]
        if isinstance(result, list) and result and isinstance(result[0], dict):
            rows = result
        elif isinstance(result, dict):
            rows = [result]
        elif isinstance(result, list):
            rows = [{"row": i, **{f"col{j}": x for j, x in enumerate(r)}} for i, r in enumerate(result)]
        else:
            rows = [{"value": result}]
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "export":
            cmd_export(args, err, out)
            return EXIT_OK
        records = COMMANDS[args.command](args, err)
    except InputValidationError as exc:
        err.write(f"localtime: invalid input: {exc}\n")
        return EXIT_INPUT
    except ComputationError as exc:
        err.write(f"localtime: computation failed: {type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE
    if getattr(args, "format", "json") == "csv":
        out.write(_csv(records))
    else:
        for rec in records:
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
