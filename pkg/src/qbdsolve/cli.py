"""Command-line front end: ``qbdsolve {solve,bench,check,generate}``.

Errors go to stderr as one line ``error:<code>: <message>``. Exit codes:
0 ok, 1 other failure, 2 parse/unreadable input, 3 validation,
4 singular matrix, 5 no convergence, 6 monotonicity, 7 M-matrix certificate.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .bench import DEFAULT_DELTAS, DEFAULT_METHODS, DEFAULT_SIZES, run_bench, write_csv
from .core import drift_rate
from .errors import QbdError
from .problems import (
    make_delta_example,
    make_scalar_problem,
    random_problem,
    read_problem,
    write_matrix,
    write_problem,
)
from .solvers import METHODS, SolverOptions, mmatrix_certificate, solve, structured_certificate
from .sylvester import KRONECKER_CAP, build_step_context

EXIT_CODES = {
    "parse": 2,
    "io": 2,
    "validation": 3,
    "singular": 4,
    "no-convergence": 5,
    "monotonicity": 6,
    "certificate": 7,
    "not-z-matrix": 7,
}

NULL_RECURRENT_TOL = 1e-12


def _fail(code, message):
    print(f"error:{code}: {message}", file=sys.stderr)
    return EXIT_CODES.get(code, 1)


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _str_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def classify(rho):
    if abs(rho - 1.0) <= NULL_RECURRENT_TOL:
        return "null recurrent"
    return "positive recurrent" if rho < 1.0 else "transient"


def certificate_at_zero(p):
    X0 = np.zeros((p.n, p.n))
    if p.n <= KRONECKER_CAP:
        return mmatrix_certificate(p, X0)
    return structured_certificate(build_step_context(p, X0))


def cmd_solve(args):
    p = read_problem(args.problem)
    opts = SolverOptions(tol=args.tol, max_outer=args.max_outer, m=args.m)
    X, rep = solve(p, args.method, opts)
    m = args.m if args.method == "newton-shamanskii" else 1
    print(f"method={args.method} m={m} outer={rep.outer_steps} inner={rep.inner_steps} "
          f"nres={rep.nres:.3e} time_ms={1e3 * rep.elapsed:.3f} converged=yes")
    if args.out:
        write_matrix(X, args.out)
    return 0


def cmd_bench(args):
    methods = _str_list(args.methods)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        return _fail("validation", f"unknown method(s) {unknown}")
    rows = run_bench(_int_list(args.sizes), _float_list(args.deltas), methods,
                     m=args.m, tol=args.tol, max_outer=args.max_outer, jobs=args.jobs)
    if args.csv and args.csv != "-":
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"error:{r.error}: cell delta={r.delta!r} n={r.n} method={r.method} failed",
              file=sys.stderr)
    return EXIT_CODES.get(failed[0].error, 1) if failed else 0


def cmd_check(args):
    p = read_problem(args.problem)
    print(f"valid n={p.n}")
    rho = drift_rate(p)
    cert = certificate_at_zero(p)
    verdict = "certificate OK" if cert else f"certificate FAILED ({cert.reason})"
    print(f"rho={rho:.12g}, {classify(rho)}, {verdict}")
    return 0


def cmd_generate(args):
    if args.kind == "delta-example":
        p = make_delta_example(args.n, args.delta)
    elif args.kind == "scalar":
        p = make_scalar_problem(args.a, args.c)
    else:
        p = random_problem(args.n, args.seed, args.rho)
    write_problem(p, args.out)
    print(f"rho={drift_rate(p):.12g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qbdsolve",
        description="Minimal nonnegative solution of A X^2 + B X + C = 0 for QBD chains.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tol", type=float, default=1e-13, help="NRes stopping threshold")
        sp.add_argument("--max-outer", type=int, default=200)
        sp.add_argument("--m", type=int, default=2,
                        help="updates per derivative evaluation (newton-shamanskii)")

    sp = sub.add_parser("solve", help="solve a problem file")
    sp.add_argument("problem")
    sp.add_argument("--method", choices=sorted(METHODS), default="newton-shamanskii")
    sp.add_argument("--out", help="write the solution matrix here")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="iteration-count grid on the delta example")
    sp.add_argument("--sizes", default=",".join(map(str, DEFAULT_SIZES)))
    sp.add_argument("--deltas", default=",".join(map(repr, DEFAULT_DELTAS)))
    sp.add_argument("--methods", "--method", dest="methods", default=",".join(DEFAULT_METHODS))
    sp.add_argument("--csv", help="output CSV path (default stdout)")
    sp.add_argument("--jobs", type=int, default=1, help="worker threads")
    common(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("check", help="validate a problem, report drift and certificate")
    sp.add_argument("problem")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("generate", help="write a benchmark problem file")
    sp.add_argument("kind", choices=["delta-example", "random", "scalar"])
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rho", type=float, default=None, help="target drift (random)")
    sp.add_argument("--a", type=float, default=0.2, help="scalar A entry")
    sp.add_argument("--c", type=float, default=0.5, help="scalar C entry")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QbdError as exc:
        return _fail(exc.code, exc)
    except OSError as exc:
        return _fail("io", exc)


if __name__ == "__main__":
    sys.exit(main())
