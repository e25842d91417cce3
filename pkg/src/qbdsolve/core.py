"""Problem type, validation, and the quadratic map with its derivatives.

A discrete-time QBD chain gives blocks ``A``, ``B``, ``C`` with ``A``,
``B + I``, ``C`` nonnegative and ``A + B + I + C`` an irreducible stochastic
matrix. The quantity of interest is the minimal nonnegative solution of
``A X^2 + B X + C = 0``.

Note on the row-sum condition: the stochastic matrix is ``A + B + I + C``,
so rows of ``A + B + I + C`` are required to sum to one (not ``A + B + C``).
This is what makes the drift of the standard benchmark equal ``1 - delta``.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    Reducible,
    RowSumViolation,
    SingularMatrix,
    SingularSystem,
)
from .linalg import as_square, lu_factor, lu_solve, norm_inf

__all__ = [
    "QbdProblem",
    "SolveReport",
    "drift_rate",
    "frechet_apply",
    "q_apply",
    "residual_nres",
    "second_derivative_apply",
    "stationary_vector",
    "strongly_connected",
    "validate_problem",
]

ROW_SUM_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class QbdProblem:
    """Validated coefficient blocks. Build with :func:`validate_problem`."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    def generator_sum(self):
        """The stochastic matrix ``A + B + I + C``."""
        return self.A + self.B + np.eye(self.n) + self.C

    def same_as(self, other):
        return all(
            np.array_equal(x, y)
            for x, y in ((self.A, other.A), (self.B, other.B), (self.C, other.C))
        )


@dataclass
class SolveReport:
    """Iteration trace of one solve.

    ``outer_steps`` counts derivative evaluations (context builds);
    ``inner_steps`` counts iterate updates. ``residual_history`` holds
    ``(inner_step, NRes)`` pairs starting with the initial iterate.
    ``elapsed`` (seconds) does not take part in equality.
    """

    outer_steps: int = 0
    inner_steps: int = 0
    residual_history: list = field(default_factory=list)
    monotone_ok: bool = True
    mmatrix_ok: bool = True
    converged: bool = False
    min_pivot_ratio: float = 1.0
    elapsed: float = field(default=0.0, compare=False)
    iterates: list = field(default_factory=list, compare=False, repr=False)

    @property
    def nres(self):
        return self.residual_history[-1][1] if self.residual_history else float("nan")

    def __eq__(self, other):
        if not isinstance(other, SolveReport):
            return NotImplemented
        fields = ("outer_steps", "inner_steps", "monotone_ok", "mmatrix_ok",
                  "converged", "min_pivot_ratio")
        if any(getattr(self, f) != getattr(other, f) for f in fields):
            return False
        return self.residual_history == other.residual_history


def strongly_connected(P):
    """Return ``None`` if the pattern ``P > 0`` is irreducible, otherwise a
    closed (invariant) subset of states as a sorted list."""
    adj = np.asarray(P) > 0
    n = adj.shape[0]

    def reach(start, matrix):
        seen = np.zeros(n, dtype=bool)
        seen[start] = True
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(matrix[i] & ~seen):
                seen[j] = True
                queue.append(j)
        return seen

    forward = reach(0, adj)
    if not forward.all():
        return sorted(int(i) for i in np.flatnonzero(forward))
    backward = reach(0, adj.T)
    if not backward.all():
        # a state that cannot reach 0 has a forward-closed set without 0
        i = int(np.flatnonzero(~backward)[0])
        return sorted(int(j) for j in np.flatnonzero(reach(i, adj)))
    return None


def validate_problem(A, B, C, tol=ROW_SUM_TOL):
    """Check the QBD invariants and return an immutable :class:`QbdProblem`."""
    A = as_square(A, "A")
    B = as_square(B, "B")
    C = as_square(C, "C")
    if not (A.shape == B.shape == C.shape):
        raise DimensionMismatch(
            f"blocks differ in shape: A {A.shape}, B {B.shape}, C {C.shape}"
        )
    n = A.shape[0]
    if n == 0:
        raise DimensionMismatch("blocks must be at least 1x1")
    I = np.eye(n)
    for name, block in (("A", A), ("B+I", B + I), ("C", C)):
        bad = np.argwhere(block < 0)
        if bad.size:
            i, j = bad[0]
            raise NegativeEntry(name, (int(i), int(j)), float(block[i, j]))
    P = A + B + I + C
    dev = P.sum(axis=1) - 1.0
    worst = int(np.argmax(np.abs(dev)))
    if abs(dev[worst]) > tol:
        raise RowSumViolation(worst, float(dev[worst]))
    subset = strongly_connected(P)
    if subset is not None:
        raise Reducible(subset)
    return QbdProblem(_frozen(A), _frozen(B), _frozen(C))


def _check_square(p, *mats):
    for M in mats:
        if np.shape(M) != (p.n, p.n):
            raise DimensionMismatch(f"expected {p.n}x{p.n}, got {np.shape(M)}")


def q_apply(p, X):
    """``A X^2 + B X + C``."""
    _check_square(p, X)
    return p.A @ (X @ X) + p.B @ X + p.C


def frechet_apply(p, X, Z):
    """Derivative of the quadratic map at ``X`` applied to ``Z``:
    ``A Z X + A X Z + B Z``."""
    _check_square(p, X, Z)
    return p.A @ (Z @ X) + p.A @ (X @ Z) + p.B @ Z


def second_derivative_apply(p, Z1, Z2):
    """``A Z1 Z2 + A Z2 Z1`` (independent of the base point)."""
    _check_square(p, Z1, Z2)
    return p.A @ (Z1 @ Z2) + p.A @ (Z2 @ Z1)


def stationary_vector(P, tol=ROW_SUM_TOL):
    """Stationary probability vector of an irreducible row-stochastic ``P``.

    Solves ``(P^T - I) p = 0`` with the last equation replaced by
    ``sum(p) = 1``.
    """
    P = as_square(P, "P")
    n = P.shape[0]
    dev = np.abs(P.sum(axis=1) - 1.0)
    if n == 0 or dev.max() > tol or (P < 0).any():
        raise SingularSystem("P is not a row-stochastic matrix")
    K = P.T - np.eye(n)
    K[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        return lu_solve(lu_factor(K), rhs)
    except SingularMatrix as exc:
        raise SingularSystem(f"stationary system is singular (reducible P?): {exc}") from exc


def drift_rate(p):
    """``p^T (B + I + 2A) e`` with ``p`` stationary for ``A + B + I + C``."""
    pi = stationary_vector(p.generator_sum())
    return float(pi @ (p.B + np.eye(p.n) + 2.0 * p.A).sum(axis=1))


def residual_nres(p, X, QX=None):
    """Normalized residual in the matrix infinity-norm.

    ``||A X^2 + B X + C|| / (||X|| (||A|| ||X|| + ||B||) + ||C||)``.
    ``QX`` may carry an already computed ``q_apply(p, X)``. A zero
    denominator forces a zero numerator, reported as 0.
    """
    _check_square(p, X)
    num = norm_inf(q_apply(p, X) if QX is None else QX)
    nx = norm_inf(X)
    den = nx * (norm_inf(p.A) * nx + norm_inf(p.B)) + norm_inf(p.C)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ZeroDivisionError("NRes denominator vanished with nonzero residual")
    return num / den
