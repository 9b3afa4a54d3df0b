"""Command-line front end: ``corrmax {solve,bound,check,scan,demo,convert}``.

Exit status is 0 on success, 2 on invalid input and 3 on any other failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import bounds, io
from .measurement import naimark_extend, trine_pom
from .optimizer import certify, mirror_family_curve, optimize_coincidence
from .scan import ScanConfig, run_scan
from .state import isotropic, named_state, werner
from .validation import ValidationError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

BOUND_KINDS = ("two-qubit", "theorem", "cross-norm", "orthogonal", "covariance", "witnesses", "holevo")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def emit_csv(series, path) -> None:
    """Write ``(x, value)`` rows under an ``x,value`` header."""
    try:
        fh = open(path, "w", newline="") if path not in (None, "-") else None
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None
    out = fh if fh is not None else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "value"])
    for x, v in series:
        w.writerow([repr(float(x)), repr(float(v))])
    if fh is not None:
        fh.close()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _plain(np.stack([obj.real, obj.imag], axis=-1))
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def _print_report(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(_plain(report), indent=1))
        return
    for key, val in report.items():
        val = _plain(val)
        if isinstance(val, float):
            val = f"{val:.12g}"
        elif isinstance(val, (list, dict)):
            val = json.dumps(val)
        print(f"{key}: {val}")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CORRMAX_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"CORRMAX_SEED must be an integer, got {env!r}") from None


def _parse_n(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"n must be an integer or 'inf', got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _result_report(res) -> dict:
    disc = res.discrimination
    return {
        "coincidence": res.coincidence,
        "residual": res.residual,
        "gradient_norm": res.gradient_norm,
        "classification": res.classification,
        "hessian_min": res.hessian_min,
        "hessian_max": res.hessian_max,
        "converged": res.converged,
        "vwcon_a": disc.side_a,
        "vwcon_b": disc.side_b,
        "margin_a": disc.margin_a,
        "margin_b": disc.margin_b,
    }


def cmd_solve(args) -> dict:
    rho = io.load_state(args.state)
    res = optimize_coincidence(
        rho, args.n, restarts=args.restarts, seed=_seed(args), max_iters=args.max_iters, tol=args.tol
    )
    report = _result_report(res)
    report["n"] = res.x.n
    report["pom_a"] = io.pom_to_dict(res.pom_a)
    report["pom_b"] = io.pom_to_dict(res.pom_b)
    if args.out_a:
        io.save_pom(res.pom_a, args.out_a)
    if args.out_b:
        io.save_pom(res.pom_b, args.out_b)
    return report


def _bound(rho, kind, n):
    if kind == "two-qubit":
        return bounds.two_qubit_max(rho)
    if kind == "theorem":
        return bounds.theorem_bound(rho, max(rho.dims) if n is None else n)
    if kind == "cross-norm":
        return bounds.cross_norm_bound(rho)
    if kind == "orthogonal":
        return bounds.orthogonal_bound(rho)
    if kind == "covariance":
        return bounds.covariance_bound(rho)
    if kind == "holevo":
        return bounds.BoundReport("holevo", bounds.holevo_bound(rho))
    w = bounds.separability_witnesses(rho)
    return bounds.BoundReport("witnesses", w.hs_norm, {**asdict(w), "hs_flag": w.hs_flag, "purity_flag": w.purity_flag, "logneg_flag": w.logneg_flag})


def _family_state(family, x, d):
    if family == "isotropic":
        return isotropic(x)
    return werner(d, x)


def cmd_bound(args) -> dict:
    if args.csv is not None:
        if args.family is None:
            raise ValidationError("--csv needs --family and --grid")
        lo, hi, num = args.grid
        series = [(x, _bound(_family_state(args.family, x, args.d), args.kind, args.n).value) for x in np.linspace(lo, hi, int(num))]
        emit_csv(series, args.csv)
        return {"kind": args.kind, "family": args.family, "points": len(series), "csv": args.csv}
    if args.state is None:
        raise ValidationError("bound needs --state (or --family with --csv)")
    rep = _bound(io.load_state(args.state), args.kind, args.n)
    return {"kind": rep.kind, "value": rep.value, "certificate": rep.certificate}


def cmd_check(args) -> dict:
    rho = io.load_state(args.state)
    a, b = io.load_pom(args.pom_a), io.load_pom(args.pom_b)
    n = max(a.n_outcomes, b.n_outcomes)
    if a.n_outcomes != b.n_outcomes:
        raise ValidationError(f"POMs have different outcome counts ({a.n_outcomes}, {b.n_outcomes})")
    if a.dim != rho.d1 or b.dim != rho.d2:
        raise ValidationError(f"POM dimensions ({a.dim}, {b.dim}) do not match state dims {rho.dims}")
    res = certify(rho, naimark_extend(a, n).vectors, naimark_extend(b, n).vectors)
    return _result_report(res)


def cmd_scan(args) -> dict:
    cfg = ScanConfig(
        dims=args.dims,
        count=args.count,
        ns=args.ns,
        rank=args.rank,
        restarts=args.restarts,
        seed=_seed(args) or 0,
        out=args.out,
        workers=args.workers,
    )
    summary = run_scan(cfg, resume=args.resume)
    report = asdict(summary)
    report["note"] = "multi-start variational optimisation per state, not exhaustive POM enumeration"
    return report


def cmd_demo(args) -> dict:
    if args.name == "trine":
        rho = named_state("trine_demo")
        pom = trine_pom()
        res = certify(rho, naimark_extend(pom, 3).vectors, naimark_extend(pom, 3).vectors)
        return _result_report(res)
    if args.name == "mirror":
        series = mirror_family_curve(np.linspace(0, 1, args.points))
    elif args.name == "isotropic":
        series = [(w, bounds.two_qubit_max(isotropic(w)).value) for w in np.linspace(0, 1, args.points)]
    else:
        rows = []
        for x in np.linspace(-1, 1, args.points):
            rows.append(
                {
                    "d": args.d,
                    "x": float(x),
                    "exact": bounds.werner_exact(args.d, x),
                    "theorem": bounds.theorem_bound(werner(args.d, x), args.d).value,
                    "cross_norm": bounds.cross_norm_bound(werner(args.d, x)).value,
                }
            )
        if args.csv:
            emit_csv([(r["x"], r["exact"]) for r in rows], args.csv)
        return {"table": rows}
    if args.csv:
        emit_csv(series, args.csv)
        return {"demo": args.name, "points": len(series), "csv": args.csv}
    return {"demo": args.name, "series": [list(p) for p in series]}


def cmd_convert(args) -> dict:
    obj = io.load_document(args.input)
    io.save_document(obj, args.output)
    return {"input": args.input, "output": args.output, "type": type(obj).__name__}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="corrmax", description="Maximal local-measurement correlations of bipartite states.")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="maximise the coincidence rate")
    s.add_argument("--state", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iters", type=int, default=5000)
    s.add_argument("--out-a")
    s.add_argument("--out-b")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bound", help="closed-form maxima and upper bounds")
    b.add_argument("--state")
    b.add_argument("--kind", choices=BOUND_KINDS, default="cross-norm")
    b.add_argument("--n", type=_parse_n)
    b.add_argument("--csv", help="sweep a family and write x,value rows")
    b.add_argument("--family", choices=("isotropic", "werner"))
    b.add_argument("--grid", type=float, nargs=3, metavar=("START", "STOP", "NUM"), default=(0.0, 1.0, 11))
    b.add_argument("--d", type=int, default=2)
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("check", help="certify a state and POM pair")
    c.add_argument("--state", required=True)
    c.add_argument("--pom-a", required=True)
    c.add_argument("--pom-b", required=True)
    c.set_defaults(func=cmd_check)

    sc = sub.add_parser("scan", help="seeded comparison of C^(n) across n")
    sc.add_argument("--dims", type=_int_list, default=(2, 2))
    sc.add_argument("--count", type=int, default=1200)
    sc.add_argument("--ns", type=_int_list)
    sc.add_argument("--rank", type=int)
    sc.add_argument("--restarts", type=int, default=4)
    sc.add_argument("--seed", type=int)
    sc.add_argument("--out")
    sc.add_argument("--resume", action="store_true")
    sc.add_argument("--workers", type=int, default=1)
    sc.set_defaults(func=cmd_scan)

    d = sub.add_parser("demo", help="worked examples")
    d.add_argument("name", choices=("trine", "mirror", "isotropic", "werner"))
    d.add_argument("--points", type=int, default=None)
    d.add_argument("--csv")
    d.add_argument("--d", type=int, default=3)
    d.set_defaults(func=cmd_demo)

    cv = sub.add_parser("convert", help="read and rewrite a state or POM file")
    cv.add_argument("input")
    cv.add_argument("output")
    cv.set_defaults(func=cmd_convert)
    return p


_DEFAULT_POINTS = {"mirror": 101, "isotropic": 11, "werner": 5, "trine": 0}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "demo" and args.points is None:
            args.points = _DEFAULT_POINTS[args.name]
        report = args.func(args)
    except ValidationError as exc:
        print(f"corrmax: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"corrmax: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_report(report, args.json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
