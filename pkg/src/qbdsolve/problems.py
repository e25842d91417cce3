"""Benchmark generators, closed-form scalar cases and the problem file format.

File format (UTF-8, LF): the integer ``n`` on the first content line, then
exactly ``3n`` rows of ``n`` whitespace-separated decimals: the rows of
``A``, then ``B``, then ``C``. Blank lines and lines starting with ``#``
are ignored. Values are written with 17 significant digits, which
round-trips every float64 exactly.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import drift_rate, validate_problem
from .errors import ParameterOutOfRange, ParseError, TargetUnreachable

__all__ = [
    "DeltaExampleSpec",
    "format_matrix",
    "format_problem",
    "make_delta_example",
    "make_scalar_problem",
    "parse_problem",
    "random_problem",
    "read_matrix",
    "read_problem",
    "scalar_minimal_root",
    "write_matrix",
    "write_problem",
]

RHO_TOL = 1e-6
# weight moved from C to A when no drift target is given; keeps rho well below 1
DEFAULT_MIX = 0.3


@dataclass(frozen=True)
class DeltaExampleSpec:
    n: int
    delta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterOutOfRange(f"delta example needs integer n >= 2, got {self.n}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterOutOfRange(f"delta must lie in (0, 1), got {self.delta}")


def make_delta_example(n, delta=None):
    """``A = W``, ``B = W - I``, ``C = W + delta I`` with ``W`` having a zero
    diagonal and constant off-diagonal ``w``.

    Row sums of ``A + B + I + C = 3W + delta I`` are ``3 (n-1) w + delta``,
    so stochasticity forces ``w = (1 - delta) / (3 (n - 1))``. The sum is
    symmetric, its stationary vector uniform, and the drift ``1 - delta``.
    Accepts either ``(n, delta)`` or a :class:`DeltaExampleSpec`.
    """
    params = n if isinstance(n, DeltaExampleSpec) else DeltaExampleSpec(n, delta)
    n, delta = int(params.n), float(params.delta)
    w = (1.0 - delta) / (3.0 * (n - 1))
    W = np.full((n, n), w)
    np.fill_diagonal(W, 0.0)
    I = np.eye(n)
    return validate_problem(W, W - I, W + delta * I)


def make_scalar_problem(a, c):
    """The ``n = 1`` problem ``a x^2 - (a + c) x + c = 0``."""
    if a < 0 or c < 0 or a + c > 1:
        raise ParameterOutOfRange(f"need a, c >= 0 and a + c <= 1, got a={a}, c={c}")
    return validate_problem([[a]], [[-a - c]], [[c]])


def scalar_minimal_root(a, c):
    """Minimal nonnegative root of ``(a x - c)(x - 1) = 0``."""
    if a > 0:
        return min(1.0, c / a)
    # linear case: c (1 - x) = 0
    return 1.0 if c > 0 else 0.0


def random_problem(n, seed, rho_target=None):
    """Random dense problem with strictly positive blocks.

    Each row splits its mass between ``A``, ``B + I`` and ``C`` with random
    weights; a mixing parameter ``t`` moves weight from ``C`` to ``A``.
    With ``rho_target`` the parameter is found by bisection so that the
    drift matches to ``1e-6``.
    """
    if int(n) != n or n < 1:
        raise ParameterOutOfRange(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = np.random.default_rng(seed)
    shapes = rng.uniform(0.1, 1.0, size=(3, n, n))
    shapes /= shapes.sum(axis=2, keepdims=True)
    wa, wc = rng.uniform(0.3, 1.0, size=(2, n))
    wb = rng.uniform(0.02, 0.3, size=n)
    I = np.eye(n)

    def build(t):
        a = t * wa
        c = (1.0 - t) * wc
        s = a + wb + c
        A = (a / s)[:, None] * shapes[0]
        B = (wb / s)[:, None] * shapes[1] - I
        C = (c / s)[:, None] * shapes[2]
        return validate_problem(A, B, C)

    if rho_target is None:
        return build(DEFAULT_MIX)

    lo, hi = 1e-3, 1.0 - 1e-3
    f_lo = drift_rate(build(lo)) - rho_target
    f_hi = drift_rate(build(hi)) - rho_target
    if f_lo * f_hi > 0:
        raise TargetUnreachable(
            f"rho_target={rho_target} outside reachable range "
            f"[{f_lo + rho_target:.6g}, {f_hi + rho_target:.6g}] for this seed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = build(mid)
        f_mid = drift_rate(p) - rho_target
        if abs(f_mid) <= RHO_TOL:
            return p
        if (f_mid > 0) == (f_hi > 0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    raise TargetUnreachable(f"bisection stalled for rho_target={rho_target}")


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------


def _format_rows(M):
    return [" ".join(format(float(x), ".17g") for x in row) for row in M]


def format_problem(p):
    lines = [str(p.n)]
    for name, M in (("A", p.A), ("B", p.B), ("C", p.C)):
        lines.append(f"# {name}")
        lines.extend(_format_rows(M))
    return "\n".join(lines) + "\n"


def format_matrix(X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return "\n".join([str(X.shape[0])] + _format_rows(X)) + "\n"


def _content_lines(text):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, raw


def _parse_rows(text, blocks):
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty input: expected the dimension n", 1)
    lineno, raw = lines[0]
    try:
        n = int(raw.strip())
    except ValueError:
        raise ParseError(f"expected an integer dimension, got {raw.strip()!r}",
                         lineno, raw.index(raw.strip()) + 1) from None
    if n < 1:
        raise ParseError(f"dimension must be positive, got {n}", lineno)
    rows = lines[1:]
    expected = blocks * n
    if len(rows) != expected:
        where = rows[-1][0] if rows else lineno
        raise ParseError(f"expected {expected} matrix rows for n={n}, found {len(rows)}", where)
    data = np.empty((expected, n))
    for r, (lineno, raw) in enumerate(rows):
        tokens = raw.split()
        if len(tokens) != n:
            raise ParseError(f"expected {n} values, found {len(tokens)}", lineno)
        pos = 0
        for k, tok in enumerate(tokens):
            pos = raw.index(tok, pos)
            try:
                data[r, k] = float(tok)
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", lineno, pos + 1) from None
            pos += len(tok)
    return n, data


def parse_problem(text):
    n, data = _parse_rows(text, 3)
    return validate_problem(data[:n], data[n:2 * n], data[2 * n:])


def read_problem(path):
    return parse_problem(Path(path).read_text(encoding="utf-8"))


def write_problem(p, path):
    Path(path).write_text(format_problem(p), encoding="utf-8", newline="\n")


def read_matrix(path):
    """Read a single ``n x n`` matrix (``n`` followed by ``n`` rows)."""
    _, data = _parse_rows(Path(path).read_text(encoding="utf-8"), 1)
    return data


def write_matrix(X, path):
    Path(path).write_text(format_matrix(X), encoding="utf-8", newline="\n")
