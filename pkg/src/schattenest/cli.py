"""Command-line front end: ``estimate``, ``exact`` and ``gen``.

Every command prints one JSON document on a single line. Exit codes: 0 on
success, 1 for bad flags, unreadable or invalid input, 2 when the numerics
produce a non-finite value.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings

from . import __version__
from .estimator import EstimationError, schatten_general, schatten_kappa, schatten_plain
from .generate import SPECTRUM_KINDS, SpectrumSpec, make_spsd_matrix
from .linop import load_matrix_market, save_matrix_market
from .oracle import DENSE_LIMIT, schatten_exact, schatten_exact_general
from .series import RIGOR_MODES

REPORT_KEYS = (
    "algorithm", "n", "nnz", "p", "eps", "delta", "kappa", "seed", "rigor", "t", "m",
    "alpha", "estimate_p_power", "estimate_norm", "warning_flags", "elapsed_ms", "matvec_count",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def dump_report(report: dict) -> str:
    """Serialize a report on one line with the fixed key order."""
    return json.dumps({k: report[k] for k in REPORT_KEYS}, allow_nan=False)


def estimate_report(result, *, eps, delta, kappa) -> dict:
    d = result.diagnostics
    return {
        "algorithm": d["algorithm"],
        "n": d["n"],
        "nnz": d["nnz"],
        "p": d["p"],
        "eps": eps,
        "delta": delta,
        "kappa": kappa,
        "seed": result.params.seed,
        "rigor": result.params.rigor,
        "t": result.params.t,
        "m": result.params.m,
        "alpha": result.params.alpha,
        "estimate_p_power": result.value_p_power,
        "estimate_norm": result.value_norm,
        "warning_flags": list(result.warning_flags),
        "elapsed_ms": dict(d["elapsed_ms"]),
        "matvec_count": d["matvec_count"],
    }


def _load(path):
    try:
        return load_matrix_market(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def cmd_estimate(args) -> dict:
    A = _load(args.input)
    kwargs = dict(eps=args.eps, delta=args.delta, seed=args.seed, rigor=args.rigor,
                  alpha=args.alpha, n_jobs=args.threads)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.general:
            if args.kappa is not None:
                raise UsageError("--kappa cannot be combined with --general")
            result = schatten_general(A, args.p, **kwargs)
        elif args.kappa is not None:
            result = schatten_kappa(A, args.p, args.kappa, **kwargs)
        else:
            result = schatten_plain(A, args.p, **kwargs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return estimate_report(result, eps=args.eps, delta=args.delta, kappa=args.kappa)


def cmd_exact(args) -> dict:
    A = _load(args.input)
    n = A.shape[0]
    if n > DENSE_LIMIT:
        raise UsageError(f"dimension {n} exceeds the dense limit of {DENSE_LIMIT} for exact mode")
    start = time.perf_counter()
    value = schatten_exact_general(A, args.p) if args.general else schatten_exact(A, args.p)
    total = (time.perf_counter() - start) * 1e3
    return {
        "algorithm": "exact",
        "n": n,
        "nnz": int(A.nnz),
        "p": args.p,
        "eps": None,
        "delta": None,
        "kappa": None,
        "seed": None,
        "rigor": None,
        "t": None,
        "m": None,
        "alpha": None,
        "estimate_p_power": value,
        "estimate_norm": value ** (1.0 / args.p),
        "warning_flags": [],
        "elapsed_ms": {"alpha_phase": 0.0, "hutchinson_phase": 0.0, "total": total},
        "matvec_count": 0,
    }


def _parse_values(text):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise UsageError(f"--values must be a comma-separated list of numbers: {exc}") from exc


def cmd_gen(args) -> dict:
    values = _parse_values(args.values) if args.values else ()
    n = args.n if args.n is not None else len(values)
    if n is None or n < 1:
        raise UsageError("--n is required unless --values is given")
    spec = SpectrumSpec(n=n, kind=args.spectrum, lambda_min=args.lambda_min, lambda_max=args.lambda_max,
                        kappa=args.kappa, values=values, zeros=args.zeros, density=args.density,
                        seed=args.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        A, lam = make_spsd_matrix(spec)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    save_matrix_market(args.out, A, symmetric=True,
                       comment=f"generated: spectrum={spec.kind} n={n} density={spec.density} seed={spec.seed}")
    lam_max, lam_min = float(lam[0]), float(lam[-1])
    sidecar = {
        "path": os.fspath(args.out),
        "n": n,
        "nnz": int(A.nnz),
        "spectrum": spec.kind,
        "density": spec.density,
        "seed": spec.seed,
        "lambda_max": lam_max,
        "lambda_min": lam_min,
        "kappa": lam_max / lam_min if lam_min > 0 else None,
        "schatten_p_power": {repr(float(p)): math.fsum(lam**p) for p in args.p},
        "eigenvalues": [float(v) for v in lam],
    }
    with open(f"{os.fspath(args.out)}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    return sidecar


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schattenest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="randomized estimate of ||A||_p^p")
    est.add_argument("--input", required=True, help="Matrix Market file")
    est.add_argument("--p", type=float, required=True)
    est.add_argument("--eps", type=float, default=0.1)
    est.add_argument("--delta", type=float, default=0.1)
    est.add_argument("--kappa", type=float, default=None,
                     help="condition-number bound; selects the kappa-dependent algorithm")
    est.add_argument("--alpha", type=float, default=None,
                     help="known bound lambda_1 <= alpha <= 6 lambda_1; skips power iteration")
    est.add_argument("--general", action="store_true", help="input is an arbitrary square matrix B")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--rigor", choices=RIGOR_MODES, default="practical")
    est.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    est.set_defaults(func=cmd_estimate)

    ex = sub.add_parser("exact", help="exact ||A||_p^p by dense eigendecomposition")
    ex.add_argument("--input", required=True)
    ex.add_argument("--p", type=float, required=True)
    ex.add_argument("--general", action="store_true")
    ex.set_defaults(func=cmd_exact)

    gen = sub.add_parser("gen", help="write a synthetic SPSD matrix with known spectrum")
    gen.add_argument("--out", required=True, help="output Matrix Market path; sidecar goes to OUT.json")
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--spectrum", choices=SPECTRUM_KINDS, default="uniform")
    gen.add_argument("--lambda-min", type=float, default=1.0)
    gen.add_argument("--lambda-max", type=float, default=10.0)
    gen.add_argument("--kappa", type=float, default=10.0)
    gen.add_argument("--values", default=None, help="comma-separated eigenvalues (explicit spectrum)")
    gen.add_argument("--zeros", type=int, default=0, help="number of eigenvalues forced to zero")
    gen.add_argument("--density", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--p", type=float, action="append", default=None,
                     help="exponent for the sidecar's exact values (repeatable; default 1 and 2)")
    gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.p is None:
        args.p = [1.0, 2.0]
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        parser.error("--threads must be a positive integer")
    try:
        report = args.func(args)
    except EstimationError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "gen":
        print(json.dumps(report))
    else:
        try:
            print(dump_report(report))
        except ValueError:
            print("error: numerical failure: report contains non-finite values", file=sys.stderr)
            return 2
    return 0
