"""Command line entry point: eval, solve, seminorm, liouville-check, counterexample.

Exit codes: 0 success, 1 bad configuration, 2 solver did not converge,
3 contraction failed, 4 divergent tail integral.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .counterexamples import CounterexampleConfig, blowup_sweep
from .errors import DivergentTail, MaxIterations, NoContraction, NonlocalError
from .grid import EllipticityParams, GridFunction, TailSpec
from .holder import SeminormQuery, alpha_prime, seminorm
from .kernels import kernel_from_json
from .liouville import LiouvilleInput, check_hypotheses
from .operators import (OperatorFamily, QuadratureConfig, bellman_apply, extremal_apply,
                        linear_apply)
from .solver import DirichletProblem, solve_bellman_dirichlet, solve_linear_dirichlet

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_CONTRACTION, EXIT_DIVERGENT = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output helpers


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_atomic(path, text):
    """Write through a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    write_atomic(path, json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n")


def write_rows(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    write_atomic(path, buf.getvalue())


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _load_u(args):
    return GridFunction.load(args.u, getattr(args, "tail", None))


def _sigma(value):
    if not 0 < value < 2:
        raise ConfigError(f"sigma = {value} must lie in (0, 2)")
    return value


# ---------------------------------------------------------------- subcommands


def _operator_from_json(obj):
    """("kernel", KernelSpec) | ("family", OperatorFamily) | ("extremal", (sign, params, sigma))."""
    if "family" in obj:
        params = EllipticityParams(float(obj["lambda"]), float(obj["Lambda"]))
        ks = tuple(kernel_from_json(d["kernel"]) for d in obj["family"])
        cs = tuple(float(d.get("c", 0.0)) for d in obj["family"])
        return "family", OperatorFamily(ks, cs, params)
    if "extremal" in obj:
        e = obj["extremal"]
        params = EllipticityParams(float(e["lambda"]), float(e["Lambda"]))
        return "extremal", (e.get("sign", "plus"), params, _sigma(float(e["sigma"])))
    return "kernel", kernel_from_json(obj)


def cmd_eval(args):
    u = _load_u(args)
    kind, op = _operator_from_json(_load_json(args.kernel))
    pts = args.points
    cfg = QuadratureConfig()
    rows = []
    for x in pts:
        if kind == "kernel":
            rows.append((x, linear_apply(u, op, x, cfg)))
        elif kind == "family":
            v, a = bellman_apply(u, op, x, cfg)
            rows.append((x, v, a))
        else:
            sign, params, sigma = op
            rows.append((x, extremal_apply(u, sign, params, x, sigma, cfg)))
    header = ["x", "value", "argmin"] if kind == "family" else ["x", "value"]
    write_rows(args.out, header, rows)
    return EXIT_OK


def problem_from_json(obj) -> DirichletProblem:
    ext = TailSpec.from_json(obj["exterior"])
    common = dict(h=float(obj["h"]), radius=float(obj.get("radius", 1.0)),
                  tol=float(obj.get("tol", 1e-10)), max_iter=int(obj.get("max_iter", 50)))
    kind, op = _operator_from_json(obj["operator"])
    if kind == "kernel":
        return DirichletProblem(ext, kernel=op, c=float(obj.get("c", 0.0)), **common)
    if kind == "family":
        return DirichletProblem(ext, family=op, **common)
    sign, params, sigma = op
    return DirichletProblem(ext, extremal=sign, params=params, sigma=sigma, **common)


def cmd_solve(args):
    prob = problem_from_json(_load_json(args.problem))
    rep = solve_linear_dirichlet(prob) if prob.mode == "linear" else solve_bellman_dirichlet(prob)
    u = rep.solution
    write_rows(args.out, ["x", "value"], zip(u.x, u.values))
    if args.report:
        out = rep.to_json()
        out["passed"] = rep.residual <= prob.tol
        write_json(args.report, out)
    return EXIT_OK


def cmd_seminorm(args):
    u = _load_u(args)
    region = list(args.region)
    q = SeminormQuery(args.beta, tuple(region), args.stride)
    val = seminorm(u, q)
    write_json(args.out, {"beta": args.beta, "region": region, "stride": args.stride,
                          "seminorm": val, "seed": args.seed})
    return EXIT_OK


def cmd_liouville(args):
    u = _load_u(args)
    e = alpha_prime(_sigma(args.sigma), args.alpha)
    inp = LiouvilleInput(u, e, args.c1, EllipticityParams(args.lam, args.Lam))
    shifts = args.shifts
    measures = [[(h, 0.5), (-h, 0.5)] for h in shifts]
    rep = check_hypotheses(inp, shifts, measures, args.radii, args.points)
    rep["exponents"] = {"sigma": e.sigma, "alpha": e.alpha, "alpha_prime": e.alpha_prime, "nu": e.nu}
    write_json(args.out, rep)
    return EXIT_OK


def cmd_counterexample(args):
    ms = tuple(args.m)
    cfg = CounterexampleConfig(kind=args.kind, sigma=_sigma(args.sigma), lam=args.lam, Lam=args.Lam,
                               ms=ms, alpha=args.alpha, h=args.h)
    rep = blowup_sweep(cfg, refine=args.refine, extras=not args.no_extras, workers=args.threads)
    if args.out:
        write_json(args.out, rep.to_json())
    if args.csv:
        write_rows(args.csv, rep.COLUMNS, [[r[c] for c in rep.COLUMNS] for r in rep.rows])
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="nonlocal-lab", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker processes for per-m sweeps")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling-based sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", help="evaluate an operator at points")
    s.add_argument("--u", required=True)
    s.add_argument("--tail")
    s.add_argument("--kernel", required=True)
    s.add_argument("--points", type=float, nargs="+", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("solve", help="solve a Dirichlet problem")
    s.add_argument("--problem", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("seminorm", help="Hölder seminorm of a grid function")
    s.add_argument("--u", required=True)
    s.add_argument("--tail")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--region", type=float, nargs=2, metavar=("A", "B"), required=True)
    s.add_argument("--stride", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_seminorm)

    s = sub.add_parser("liouville-check", help="check the Liouville hypotheses on samples")
    s.add_argument("--u", required=True)
    s.add_argument("--tail")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--c1", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--Lambda", dest="Lam", type=float, default=2.0)
    s.add_argument("--shifts", type=float, nargs="+", default=[0.5, -0.5, 1.0])
    s.add_argument("--radii", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    s.add_argument("--points", type=float, nargs="+", default=[0.0, 0.5, -1.0])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_liouville)

    s = sub.add_parser("counterexample", help="blow-up sweep over oscillation frequencies")
    s.add_argument("--kind", choices=("linear", "nonlinear"), default="linear")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--m", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--Lambda", dest="Lam", type=float, default=2.0)
    s.add_argument("--h", type=float)
    s.add_argument("--refine", action="store_true", help="re-solve the largest m at h/2")
    s.add_argument("--no-extras", action="store_true", help="skip the operator cross-check")
    s.add_argument("--out")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_counterexample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except MaxIterations as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except NoContraction as exc:
        print(f"error: contraction failed: {exc}", file=sys.stderr)
        return EXIT_CONTRACTION
    except DivergentTail as exc:
        print(f"error: divergent tail: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (NonlocalError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
