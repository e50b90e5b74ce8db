"""Command line interface.

Exit codes: 0 success, 2 parse / usage error, 3 budget exceeded, 4 domain
error.  Errors are also written to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from .hyperdet import DET_BUDGET, NAIVE_BUDGET, HyperArray, hyperdet, hyperdet_naive, work_estimate
from .errors import CapExceeded, DomainError, HyperposError, Infeasible, ParameterError, ShapeMismatch, TolBreach
from .identities import binet_cauchy_discrete, exp_schur_sum, htp_scan, pfq_schur_sum
from .kernels import DEFAULT_MIN_GAP, EvaluationGrid, KernelSpec, kernel_array
from .matrixarg import extended_hc_check, extended_hc_pfq_check, hciz_check
from .scalars import FLOAT, RATIONAL, parse_scalar, serialize_scalar

EXIT_PARSE, EXIT_CAP, EXIT_DOMAIN = 2, 3, 4


class InputError(Exception):
    pass


def _load_json(args, inline=None):
    if inline is not None:
        text = inline
    elif args.input:
        try:
            with open(args.input) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(str(exc)) from None
    else:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def _backend(args):
    return None if args.backend == "auto" else args.backend


def _scalar_list(text):
    if text is None or text == "":
        return []
    try:
        if text.strip().startswith("["):
            return [parse_scalar(v) for v in json.loads(text)]
        return [parse_scalar(v.strip()) if "/" in v else _number(v.strip()) for v in text.split(",")]
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse list {text!r}: {exc}") from None


def _number(tok: str):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def _box(text):
    vals = _scalar_list(text)
    if len(vals) != 2:
        raise InputError(f"--box needs two numbers lo,hi, got {text!r}")
    return float(vals[0]), float(vals[1])


def _kernel_spec(args, arity):
    a = _scalar_list(args.a)
    b = _scalar_list(args.b)
    kind = args.kernel
    if kind == "negbinomial" and not a:
        a = [1]
    return KernelSpec(kind, arity, tuple(a), tuple(b))


def _grid(args, backend):
    data = _load_json(args, args.grid)
    if data is None:
        raise InputError("a grid is required (--grid or --input)")
    if isinstance(data, list):
        data = {"vectors": data}
    try:
        return EvaluationGrid.from_json(data, backend)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad grid: {exc}") from None


def _coerce_grid(grid: EvaluationGrid, backend):
    # integer JSON entries parse as ints; default to the float backend
    if backend == RATIONAL:
        return grid
    return EvaluationGrid(tuple(tuple(float(x) for x in v) for v in grid.vectors))


def _dump(args, A):
    if args.dump_array:
        with open(args.dump_array, "w") as fh:
            json.dump(A.to_json(), fh)


# -- subcommands ---------------------------------------------------------------

def cmd_det(args):
    data = _load_json(args)
    if data is None:
        raise InputError("det needs --input ARRAY.json")
    try:
        A = HyperArray.from_json(data, _backend(args))
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad array: {exc}") from None
    _dump(args, A)
    work = work_estimate(A.order, A.side)
    t0 = time.perf_counter()
    det = hyperdet(A, budget=args.budget, workers=args.threads)
    out = {
        "det": serialize_scalar(det),
        "algorithm": "entry" if A.side == 1 else "reduced",
        "backend": A.backend,
        "terms": work["reduced_determinants"],
        "wall_time": time.perf_counter() - t0,
    }
    if args.oracle:
        t1 = time.perf_counter()
        naive = hyperdet_naive(A, budget=args.naive_budget)
        out["oracle"] = {
            "det": serialize_scalar(naive),
            "terms": work["naive_terms"],
            "wall_time": time.perf_counter() - t1,
        }
        if A.backend == RATIONAL:
            out["equal"] = naive == det
        else:
            out["equal"] = math.isclose(naive, det, rel_tol=1e-9, abs_tol=1e-300)
    return out


def cmd_kernel_det(args):
    backend = _backend(args)
    grid = _coerce_grid(_grid(args, backend), backend)
    spec = _kernel_spec(args, grid.arity)
    A = kernel_array(spec, grid)
    _dump(args, A)
    t0 = time.perf_counter()
    det = hyperdet(A, budget=args.budget, workers=args.threads)
    return {
        "kernel": spec.to_json(),
        "grid": grid.to_json(),
        "det": serialize_scalar(det),
        "backend": A.backend,
        "wall_time": time.perf_counter() - t0,
    }


def cmd_htp_scan(args):
    spec = _kernel_spec(args, 2 * args.m)
    box = _box(args.box) if args.box else _default_box(spec)
    report = htp_scan(spec, args.m, args.n, args.samples, args.seed, box=box, min_gap=args.min_gap,
                      workers=args.threads, budget=args.budget)
    return report.to_json()


def _default_box(spec):
    if spec.kind in ("negbinomial",) or (spec.kind == "pfq" and len(spec.a) == len(spec.b) + 1):
        return (0.0, 0.9)
    return (0.0, 1.0)


def cmd_identity(args):
    if args.which == "binet-cauchy":
        data = _load_json(args)
        if data is None:
            raise InputError("binet-cauchy needs --input with {'phi': ..., 'weights': ...}")
        backend = _backend(args)
        try:
            phi = [[[parse_scalar(v, backend) for v in row] for row in fk] for fk in data["phi"]]
            weights = [parse_scalar(v, backend) for v in data.get("weights", [1] * len(phi[0][0]))]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"bad Binet-Cauchy input: {exc}") from None
        lhs, rhs = binet_cauchy_discrete(phi, weights)
        return {"identity": "binet-cauchy", "lhs": serialize_scalar(lhs), "rhs": serialize_scalar(rhs),
                "equal": lhs == rhs}
    backend = _backend(args)
    grid = _coerce_grid(_grid(args, backend), backend)
    if args.m is not None and grid.arity != 2 * args.m:
        raise InputError(f"grid has {grid.arity} vectors, expected 2m = {2 * args.m}")
    if args.which == "exp-schur":
        series = exp_schur_sum(grid, args.max_weight)
        spec = KernelSpec.exp_product(grid.arity)
    else:
        a, b = _scalar_list(args.a), _scalar_list(args.b)
        series = pfq_schur_sum(a, b, grid, args.max_weight)
        spec = KernelSpec.classical_pfq(a, b, grid.arity)
    out = {"identity": args.which, "grid": grid.to_json(), "series": series.to_json(),
           "value": serialize_scalar(series.value)}
    if not args.no_engine:
        floats = EvaluationGrid(tuple(tuple(float(x) for x in v) for v in grid.vectors))
        engine = hyperdet(kernel_array(spec, floats), budget=args.budget, workers=args.threads)
        out["engine_det"] = serialize_scalar(engine)
        out["relative_error"] = abs(float(series.value) - engine) / abs(engine) if engine else None
    return out


def _spectra(args):
    data = _load_json(args, args.spectra)
    if data is None:
        return None
    if isinstance(data, dict):
        return data
    return {"spectra": data}


def cmd_hciz(args):
    data = _spectra(args)
    if data is not None:
        spectra = data["spectra"]
        samples = data.get("samples", args.samples)
        seed = data.get("seed", args.seed)
        weight = data.get("max_weight", args.max_weight)
    else:
        if args.x is None or args.y is None:
            raise InputError("hciz needs --x and --y (or --spectra / --input)")
        spectra = [_scalar_list(args.x), _scalar_list(args.y)]
        samples, seed, weight = args.samples, args.seed, args.max_weight
    if len(spectra) != 2:
        raise InputError("hciz needs exactly two spectra")
    if args.n is not None and any(len(s) != args.n for s in spectra):
        raise InputError(f"spectra must have length n = {args.n}")
    det_side, mc, series = hciz_check(spectra[0], spectra[1], samples, seed, weight, threads=args.threads)
    return {"det_side": det_side, "mc": mc.to_json(), "series": series.to_json(),
            "mean": mc.mean, "z_score": (mc.mean - det_side) / mc.std_error if mc.std_error else 0.0}


def cmd_hc_extended(args):
    data = _spectra(args)
    if data is None:
        raise InputError("hc-extended needs --spectra or --input")
    spectra = [[parse_scalar(v) if isinstance(v, str) else v for v in s] for s in data["spectra"]]
    samples = data.get("samples", args.samples)
    seed = data.get("seed", args.seed)
    weight = data.get("max_weight", args.max_weight)
    a, b = _scalar_list(args.a), _scalar_list(args.b)
    if a or b:
        mc, series = extended_hc_pfq_check(a, b, spectra, samples, seed, weight, threads=args.threads)
    else:
        mc, series = extended_hc_check(spectra, samples, seed, weight, threads=args.threads)
    return {"mc": mc.to_json(), "series": series.to_json(), "mean": mc.mean,
            "z_score": (mc.mean - float(series.value)) / mc.std_error if mc.std_error else 0.0}


# -- parser --------------------------------------------------------------------

def _shared():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="input JSON file")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--max-weight", type=int, default=30)
    p.add_argument("--backend", choices=["auto", RATIONAL, FLOAT], default="auto")
    p.add_argument("--budget", type=int, default=DET_BUDGET, help="cap on inner determinants")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--box", help="sampling box lo,hi")
    p.add_argument("--min-gap", type=float, default=DEFAULT_MIN_GAP)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--dump-array", help="write the evaluated array as JSON (det, kernel-det)")
    return p


def _kernel_flags(p):
    p.add_argument("--kernel", choices=["exp", "power", "negbinomial", "pfq", "polya"], default="exp")
    p.add_argument("--a", help="numerator parameters, comma separated")
    p.add_argument("--b", help="denominator parameters, comma separated")


def build_parser() -> argparse.ArgumentParser:
    shared = _shared()
    parser = argparse.ArgumentParser(prog="hyperpos", description="Hyperdeterminants and HTP verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("det", parents=[shared], help="hyperdeterminant of an array file")
    p.add_argument("--oracle", action="store_true", help="also run the naive Cayley sum")
    p.add_argument("--naive-budget", type=int, default=NAIVE_BUDGET)
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("kernel-det", parents=[shared], help="hyperdeterminant of a kernel on a grid")
    _kernel_flags(p)
    p.add_argument("--grid", help="grid JSON, e.g. [[1,0],[1,0]]")
    p.set_defaults(func=cmd_kernel_det)

    p = sub.add_parser("htp-scan", parents=[shared], help="random Weyl-chamber positivity scan")
    _kernel_flags(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_htp_scan)

    p = sub.add_parser("identity", parents=[shared], help="check a summation identity")
    p.add_argument("which", choices=["exp-schur", "pfq-schur", "binet-cauchy"])
    p.add_argument("--m", type=int)
    p.add_argument("--grid")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--no-engine", action="store_true", help="skip the hyperdeterminant comparison")
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("hciz", parents=[shared], help="Harish-Chandra integral check")
    p.add_argument("--n", type=int)
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--spectra")
    p.set_defaults(func=cmd_hciz)

    p = sub.add_parser("hc-extended", parents=[shared], help="2m-fold conjugated integral check")
    p.add_argument("--spectra", help='JSON list of eigenvalue lists or {"spectra": ..., ...}')
    p.add_argument("--a")
    p.add_argument("--b")
    p.set_defaults(func=cmd_hc_extended)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _text(report, indent=""):
    lines = []
    for k, v in report.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.extend(_text(v, indent + "  "))
        else:
            lines.append(f"{indent}{k}: {v}")
    return lines


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
    except (InputError, ShapeMismatch, json.JSONDecodeError) as exc:
        return _fail(EXIT_PARSE, exc)
    except CapExceeded as exc:
        return _fail(EXIT_CAP, exc)
    except (DomainError, ParameterError, Infeasible, TolBreach, ValueError) as exc:
        return _fail(EXIT_DOMAIN, exc)
    except HyperposError as exc:
        return _fail(EXIT_DOMAIN, exc)
    report = {"command": args.command, **report, "config": _config(args)}
    text = "\n".join(_text(report)) if args.format == "text" else json.dumps(report, indent=2, default=_default)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
