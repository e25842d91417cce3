"""Benchmark grid over the delta example, written as CSV."""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from time import perf_counter

from .errors import QbdError
from .problems import make_delta_example
from .solvers import SolverOptions, solve

__all__ = ["BenchRow", "CSV_HEADER", "DEFAULT_DELTAS", "DEFAULT_METHODS",
           "DEFAULT_SIZES", "run_bench", "write_csv"]

CSV_HEADER = ("delta", "n", "method", "m", "outer_iters", "inner_steps", "nres", "time_ms")
DEFAULT_SIZES = (20, 100, 200)
DEFAULT_DELTAS = (0.5, 0.1, 1e-3)
DEFAULT_METHODS = ("newton", "newton-shamanskii")


@dataclass
class BenchRow:
    delta: float
    n: int
    method: str
    m: int
    outer_iters: object
    inner_steps: object
    nres: object
    time_ms: float
    error: str = ""

    @property
    def failed(self):
        return bool(self.error)

    def csv_fields(self):
        nres = f"error:{self.error}" if self.failed else format(self.nres, ".6e")
        return (repr(self.delta), self.n, self.method, self.m,
                "" if self.failed else self.outer_iters,
                "" if self.failed else self.inner_steps,
                nres, format(self.time_ms, ".3f"))


def _cell(n, delta, method, m, tol, max_outer):
    effective_m = m if method == "newton-shamanskii" else 1
    start = perf_counter()
    try:
        p = make_delta_example(n, delta)
        _, rep = solve(p, method, SolverOptions(tol=tol, max_outer=max_outer, m=effective_m))
    except QbdError as exc:
        return BenchRow(delta, n, method, effective_m, None, None, None,
                        1e3 * (perf_counter() - start), exc.code)
    return BenchRow(delta, n, method, effective_m, rep.outer_steps, rep.inner_steps,
                    rep.nres, 1e3 * rep.elapsed)


def run_bench(sizes=DEFAULT_SIZES, deltas=DEFAULT_DELTAS, methods=DEFAULT_METHODS,
              m=2, tol=1e-13, max_outer=200, jobs=1):
    """Run every (n, delta, method) cell; rows come back in grid order."""
    cells = list(product(sizes, deltas, methods))
    run = lambda cell: _cell(cell[0], cell[1], cell[2], m, tol, max_outer)  # noqa: E731
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, cells))
    return [run(cell) for cell in cells]


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
