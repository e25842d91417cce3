"""Solver for the Newton step equation ``M Z + N Z X = E``.

With ``X = U T U^T`` in real Schur form the equation becomes
``M Y + N Y T = E U`` for ``Y = Z U``. Since ``T`` is quasi-upper-triangular,
column ``j`` of ``Y`` only couples to earlier columns:

    (M + T[j, j] N) y_j = (E U)[:, j] - N sum_{i<j} T[i, j] y_i

with a coupled ``2n x 2n`` system for each 2x2 diagonal block. The Schur
form and the LU factors of every shifted matrix depend on ``X`` only, so
they are built once per frozen derivative and reused for every right-hand
side.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OracleCapExceeded, SingularMatrix, SingularStepMatrix
from .linalg import as_square, lu_factor, lu_solve, real_schur

__all__ = [
    "KRONECKER_CAP",
    "NewtonStepContext",
    "build_step_context",
    "kronecker_solve",
    "solve_step",
    "step_context",
]

KRONECKER_CAP = 40


@dataclass(frozen=True, eq=False)
class NewtonStepContext:
    M: np.ndarray
    N: np.ndarray
    schur_X: object
    column_factors: tuple
    frozen_X: np.ndarray

    @property
    def n(self):
        return self.M.shape[0]

    def min_pivot_ratio(self):
        """Smallest ``min|u_ii| / max|u_ii|`` over the cached factors; a
        cheap conditioning indicator, not a true condition number."""
        if not self.column_factors:
            return 1.0
        return min(f.min_pivot_ratio() for f in self.column_factors)


def _readonly(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def step_context(M, N, X):
    """Factor the step operator ``Z -> M Z + N Z X`` for repeated solves."""
    M = as_square(M, "M")
    N = as_square(N, "N")
    X = as_square(X, "X")
    if not (M.shape == N.shape == X.shape):
        raise DimensionMismatch(f"M {M.shape}, N {N.shape}, X {X.shape} differ")
    n = M.shape[0]
    schur = real_schur(X)
    T = schur.T
    factors = []
    for j, size in zip(schur.block_starts(), schur.blocks):
        if size == 1:
            K = M + T[j, j] * N
        else:
            K = np.block([
                [M + T[j, j] * N, T[j + 1, j] * N],
                [T[j, j + 1] * N, M + T[j + 1, j + 1] * N],
            ])
        try:
            factors.append(lu_factor(K))
        except SingularMatrix as exc:
            raise SingularStepMatrix(
                f"shifted step matrix for Schur column {j} is singular "
                f"(M-matrix condition violated?) (n={n})"
            ) from exc
    return NewtonStepContext(_readonly(M), _readonly(N), schur, tuple(factors), _readonly(X))


def build_step_context(p, Xk):
    """Context for the Newton step at ``Xk``: ``M = A Xk + B``, ``N = A``."""
    Xk = as_square(Xk, "Xk")
    if Xk.shape != (p.n, p.n):
        raise DimensionMismatch(f"expected {p.n}x{p.n}, got {Xk.shape}")
    return step_context(p.A @ Xk + p.B, p.A, Xk)


def solve_step(ctx, E):
    """Solve ``M Z + N Z X = E`` with the factorizations cached in ``ctx``."""
    E = np.asarray(E, dtype=np.float64)
    n = ctx.n
    if E.shape != (n, n):
        raise DimensionMismatch(f"E has shape {E.shape}, expected {(n, n)}")
    U = ctx.schur_X.Q
    T = ctx.schur_X.T
    N = ctx.N
    Ep = E @ U
    Y = np.zeros((n, n))
    for j, size, f in zip(ctx.schur_X.block_starts(), ctx.schur_X.blocks, ctx.column_factors):
        if size == 1:
            r = Ep[:, j] - N @ (Y[:, :j] @ T[:j, j]) if j else Ep[:, j]
            Y[:, j] = lu_solve(f, r)
        else:
            R = Ep[:, j:j + 2] - N @ (Y[:, :j] @ T[:j, j:j + 2]) if j else Ep[:, j:j + 2]
            y = lu_solve(f, np.concatenate((R[:, 0], R[:, 1])))
            Y[:, j] = y[:n]
            Y[:, j + 1] = y[n:]
    return Y @ U.T


def kronecker_solve(M, N, X, E, cap=KRONECKER_CAP):
    """Reference solve of ``(X^T kron N + I kron M) vec(Z) = vec(E)``.

    Forms the ``n^2 x n^2`` matrix explicitly; refuses ``n > cap``.
    """
    M = as_square(M, "M")
    N = as_square(N, "N")
    X = as_square(X, "X")
    E = as_square(E, "E")
    n = M.shape[0]
    if not (M.shape == N.shape == X.shape == E.shape):
        raise DimensionMismatch("M, N, X, E must share one square shape")
    if n > cap:
        raise OracleCapExceeded(f"n={n} exceeds Kronecker oracle cap {cap}")
    K = np.kron(X.T, N) + np.kron(np.eye(n), M)
    z = lu_solve(lu_factor(K), E.reshape(-1, order="F"))
    return z.reshape((n, n), order="F")
