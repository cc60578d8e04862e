"""Command line front end: ``degenlab <subcommand> [flags]``.

Exit codes: 0 success, 1 validation error (bad flags or parameters),
2 numerical failure (non-convergence, censoring overflow, failed acceptance
criteria). Reports go to ``--out`` or stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import sys
import time
import warnings

import numpy as np

from . import report
from .geometry import (
    DegeneracyParams,
    Interval,
    Point,
    check_embeddings,
    check_intertwining,
    check_scaling_bounds,
    distance_D,
    doubling_ratio,
    region_volume,
)
from .geometry.regions import Ball

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def parse_radii(text: str) -> list[float]:
    """``lo:hi:geometric:k``, ``lo:hi:linear:k`` or a comma separated list."""
    parts = text.split(":")
    if len(parts) == 1:
        return parse_floats(text)
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("radii must be lo:hi:geometric|linear:count or a comma list")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radii spec {text!r}") from None
    if count < 1 or not 0 < lo <= hi:
        raise argparse.ArgumentTypeError("radii need 0 < lo <= hi and count >= 1")
    if parts[2] == "geometric":
        return [float(v) for v in np.geomspace(lo, hi, count)]
    if parts[2] == "linear":
        return [float(v) for v in np.linspace(lo, hi, count)]
    raise argparse.ArgumentTypeError(f"unknown spacing {parts[2]!r}")


def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    g = c.add_argument_group("parameters")
    g.add_argument("--n", type=int, default=1, help="dimension of x1")
    g.add_argument("--m", type=int, default=0, help="dimension of x2")
    g.add_argument("--d1", type=float, default=0.0, help="normal exponent near the degeneracy")
    g.add_argument("--d1p", type=float, default=None, help="normal exponent at infinity (default d1)")
    g.add_argument("--d2", type=float, default=0.0, help="tangential exponent near the degeneracy")
    g.add_argument("--d2p", type=float, default=None, help="tangential exponent at infinity (default d2)")
    g.add_argument("--grid", type=int, default=None, help="grid resolution (cells per axis)")
    g.add_argument("--t", type=float, default=None, help="time or cube scale")
    g.add_argument("--r", type=float, default=None, help="radius")
    g.add_argument("--dt", type=float, default=1e-3, help="time step")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trials", type=int, default=None, help="random samples or paths")
    g.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    g.add_argument("--out", default=None, help="report path (default stdout)")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    return c


def build_parser() -> Parser:
    common = _common()
    p = Parser(prog="degenlab", description="Experiments for degenerate elliptic operators of Grushin type.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, description=help_)

    s = add("distance", "quasi-distance D(x; y)")
    s.add_argument("--x", type=parse_floats, required=True, help="point x as n+m comma separated values")
    s.add_argument("--y", type=parse_floats, required=True)

    for name, help_ in (("volume", "Lebesgue measure of B(x; r)"), ("doubling", "|B(x;2r)| / |B(x;r)|")):
        s = add(name, help_)
        s.add_argument("--x", type=parse_floats, default=None, help="ball centre (default origin)")
        s.add_argument("--method", choices=("grid", "montecarlo"), default="grid")
        if name == "doubling":
            s.add_argument("--radii", type=parse_radii, default=None)

    s = add("checks", "seeded inequality suites")
    s.add_argument("--suite", choices=("scaling", "embeddings", "intertwining", "all"), default="all")

    s = add("poincare", "Poincare constant of one region")
    s.add_argument("--family", default="cube", choices=("cube", "ball", "halfball", "halfball-", "interval", "halfinterval"))
    s.add_argument("--x", type=parse_floats, default=None, help="centre for ball families")
    s.add_argument("--grid2", type=int, default=None, help="resolution along x2")

    s = add("sweep", "Poincare constants over radii with fitted slope")
    s.add_argument("--family", default="cube", choices=("cube", "ball", "halfball", "halfball-", "interval", "halfinterval"))
    s.add_argument("--radii", type=parse_radii, required=True, help="lo:hi:geometric:count or comma list")
    s.add_argument("--x", type=parse_floats, default=None, help="centre for ball families")
    s.add_argument("--grid2", type=int, default=None)

    s = add("counterexample", "chi_n or the large-cube test function")
    s.add_argument("--kind", choices=("chi_n", "chi_log"), default="chi_n")
    s.add_argument("--nparam", type=float, default=1000.0, help="cut-off parameter n of chi_n")

    s = add("heat", "heat kernel column K_t(x; .)")
    s.add_argument("--x", type=parse_floats, default=None, help="source point (default origin)")
    s.add_argument("--domain", type=float, default=None, help="half-width of the truncation interval (n=1, m=0)")

    s = add("crossing", "mass of K_t(x; .) on {x1 < 0}")
    s.add_argument("--x", type=parse_floats, required=True, help="source with x1 > 0")
    s.add_argument("--domain", type=float, default=None)

    s = add("sde", "Monte Carlo hitting probability vs scale-function oracle")
    s.add_argument("--x", type=float, default=5.0, help="start x0")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=10.0)
    s.add_argument("--no-bridge", action="store_true", help="detect barrier hits at grid times only")

    add("ends", "ends transform identities (uses --d1 in [1/2, 1))")

    s = add("accept", "acceptance criteria")
    s.add_argument("suite", choices=("geometry", "spectral", "heat", "sde", "all"))
    s.add_argument("--only", type=lambda v: [int(x) for x in v.split(",")], default=None, help="criterion numbers")
    return p


def params_from(args) -> DegeneracyParams:
    return DegeneracyParams(
        n=args.n,
        m=args.m,
        d1=args.d1,
        d1p=args.d1 if args.d1p is None else args.d1p,
        d2=args.d2,
        d2p=args.d2 if args.d2p is None else args.d2p,
    )


def _point(p: DegeneracyParams, vals) -> Point:
    if vals is None:
        return Point([0.0] * p.n, [0.0] * p.m)
    if len(vals) != p.dim:
        raise UsageError(f"point needs {p.dim} coordinates (n+m), got {len(vals)}")
    return Point(vals[: p.n], vals[p.n :])


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this subcommand")
    return value


# Each handler returns (result, table rows or None, default format).


def cmd_distance(args, p):
    x, y = _point(p, args.x), _point(p, args.y)
    return {"distance": float(distance_D(p, x, y))}, None, "json"


def cmd_volume(args, p):
    r = _need(args.r, "--r")
    vol, err = region_volume(p, Ball(_point(p, args.x), r), args.method, args.grid or 256, args.seed)
    return {"r": r, "volume": vol, "error": err, "method": args.method}, None, "json"


def cmd_doubling(args, p):
    radii = args.radii or [_need(args.r, "--r or --radii")]
    c = _point(p, args.x)
    rows = [{"r": r, "ratio": doubling_ratio(p, c, r, args.method, args.grid or 256, args.seed)} for r in radii]
    ratios = [row["ratio"] for row in rows]
    return {"rows": rows, "max": max(ratios), "max_over_min": max(ratios) / min(ratios)}, rows, "json"


def cmd_checks(args, p):
    out = {}
    if args.suite in ("scaling", "all"):
        out["scaling"] = check_scaling_bounds(args.trials or 100_000, args.seed)
    if args.suite in ("embeddings", "all"):
        out["embeddings"] = check_embeddings(args.trials or 100_000, args.seed)
    if args.suite in ("intertwining", "all"):
        out["intertwining"] = check_intertwining(p if p.m else p.replace(m=1), args.trials or 10_000, args.seed)
    out["violations"] = sum(v["violations"] for v in out.values())
    return out, None, "json"


def _default_grid(p):
    return 129 if p.m else 1025


def cmd_poincare(args, p):
    from .spectral import family_region, poincare_constant

    r = _need(args.r if args.r is not None else args.t, "--r (or --t for cubes)")
    reg = family_region(p, args.family, r, _point(p, args.x) if args.x is not None else None)
    est = poincare_constant(p, reg, args.grid or _default_grid(p), args.grid2)
    return {**est.row(), "family": args.family, "dropped_cells": est.extra["dropped_cells"]}, None, "json"


def cmd_sweep(args, p):
    from .spectral import poincare_sweep

    center = _point(p, args.x) if args.x is not None else None
    s = poincare_sweep(p, args.family, args.radii, args.grid or _default_grid(p), args.grid2, center, args.jobs)
    if s["slope"] is not None:
        print(f"fitted slope: {s['slope']:.6g}", file=sys.stderr)
    return s, s["rows"], "csv"


def cmd_counterexample(args, p):
    from .spectral import chi_log, chi_n, chi_n_report

    if args.kind == "chi_n":
        res = chi_n_report(p.d1, args.nparam, args.grid)
        x = np.linspace(-1.0, 1.0, 2049)
        rows = [{"x": float(a), "value": float(v)} for a, v in zip(x, chi_n(p.d1, args.nparam, x))]
        return res, rows, "json"
    res = chi_log(p.d1, p.d1p, _need(args.t, "--t"), args.grid or 2049)
    rows = [{"x": float(a), "value": float(v)} for a, v in zip(res.pop("x"), res.pop("values"))]
    return res, rows, "json"


def _heat_region(p, args):
    if args.domain is None:
        return None
    if p.dim != 1:
        raise UsageError("--domain is only available for n=1, m=0")
    return Interval(-args.domain, args.domain)


def cmd_heat(args, p):
    from .heat import evolve_kernel

    t = _need(args.t, "--t")
    pt = _point(p, args.x)
    x0 = np.asarray(pt.x1 + pt.x2)
    f = evolve_kernel(p, _heat_region(p, args), x0, t, args.dt, args.grid or (2049 if p.dim == 1 else 129))
    rows = [
        {**{f"x{k + 1}": float(v) for k, v in enumerate(node)}, "value": float(val)} for node, val in zip(f.nodes, f.values)
    ]
    summary = {
        "t": f.time,
        "dt": f.dt,
        "steps": f.steps,
        "source_value": float(f.values[f.source]),
        "mass": f.mass,
        "max_mass_drift": f.max_mass_drift,
        "min_ratio": f.min_ratio,
        "boundary_fraction": f.boundary_fraction,
        "cells": f.form.size,
        "warnings": f.warnings,
    }
    return summary, rows, "csv"


def cmd_crossing(args, p):
    from .heat import crossing_mass

    t = _need(args.t, "--t")
    x0 = np.asarray(args.x, dtype=float)
    if len(x0) != p.dim:
        raise UsageError(f"--x needs {p.dim} coordinates")
    res = crossing_mass(p, x0, t, args.grid or 4097, args.dt, _heat_region(p, args))
    return res, None, "json"


def cmd_sde(args, p):
    from .sde import HittingExperiment, simulate_hitting

    exp = HittingExperiment(
        deltap=p.d1p, x0=args.x, a=args.a, b=args.b, dt=args.dt, nPaths=args.trials or 100_000, seed=args.seed, bridge=not args.no_bridge
    )
    simulate_hitting(exp)
    out = exp.as_dict()
    out["bridge"] = exp.bridge
    return out, None, "json"


def cmd_ends(args, p):
    from .sde import ends_transform_check

    return ends_transform_check(p.d1), None, "json"


HANDLERS = {
    "distance": cmd_distance,
    "volume": cmd_volume,
    "doubling": cmd_doubling,
    "checks": cmd_checks,
    "poincare": cmd_poincare,
    "sweep": cmd_sweep,
    "counterexample": cmd_counterexample,
    "heat": cmd_heat,
    "crossing": cmd_crossing,
    "sde": cmd_sde,
    "ends": cmd_ends,
}


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format")}
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        report.write_text(out, text)
    else:
        sys.stdout.write(text)


def run_accept(args) -> int:
    from .acceptance import run_acceptance

    # boundary-mass warnings are recorded in the report details
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_acceptance(args.suite, args.only, stream=sys.stderr if args.out is None else sys.stdout)
    runtime = res.pop("runtime")
    status = "PASS" if res["pass"] else f"FAIL (criteria {', '.join(map(str, res['failed']))})"
    print(f"acceptance {args.suite}: {status}; total runtime {runtime['total']:.1f} s", file=sys.stderr)
    body = report.to_json(report.envelope("accept", {"suite": args.suite, "only": args.only}, res, res["seed"]))
    if args.out:
        report.write_text(args.out, body)
        report.write_runtime(args.out, runtime["total"])
    else:
        sys.stdout.write(body)
    return EXIT_OK if res["pass"] else EXIT_NUMERIC


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "accept":
            return run_accept(args)
        p = params_from(args)
        t0 = time.perf_counter()
        result, rows, fmt = HANDLERS[args.command](args, p)
        elapsed = time.perf_counter() - t0
    except (UsageError, ValueError, TypeError) as e:
        parser.print_usage(sys.stderr)
        print(f"degenlab: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as e:
        print(f"degenlab: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    fmt = args.format or fmt
    cfg = resolved_config(args)
    cfg["params"] = p.as_dict()
    if args.command == "distance" and args.out is None and args.format is None:
        print(repr(result["distance"]))
    elif fmt == "csv":
        if rows is None:
            rows = [result]
        header = {"build": report.build_id(), "command": args.command, "config": cfg, "seed": args.seed}
        scalars = {k: v for k, v in result.items() if not isinstance(v, (list, dict))} if rows is not result else {}
        header.update({f"result.{k}": v for k, v in scalars.items()})
        _emit(report.to_csv(rows, header), args.out)
    else:
        _emit(report.to_json(report.envelope(args.command, cfg, result, args.seed)), args.out)
    print(f"runtime: {elapsed:.3f} s", file=sys.stderr)
    if args.out:
        report.write_runtime(args.out, elapsed)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
