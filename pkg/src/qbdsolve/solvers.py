"""Iteration drivers for the minimal nonnegative solution.

Newton and Newton-Shamanskii share one driver: each outer step freezes the
derivative at the current iterate (one :class:`NewtonStepContext`), then
applies ``m`` updates ``X <- X - Q'_{X_k}^{-1} Q(X)`` with it. ``m = 1`` is
plain Newton. From ``X_0 = 0`` every iterate stays below the minimal
solution and increases monotonically; the drivers check this at run time.
"""

from dataclasses import dataclass
from time import perf_counter
from typing import Optional

import numpy as np

from .core import SolveReport, q_apply, residual_nres
from .errors import (
    CertificateFailure,
    DimensionMismatch,
    MaxIterations,
    MonotonicityViolation,
    NotZMatrix,
    OracleCapExceeded,
    ParameterOutOfRange,
    SingularMatrix,
)
from .linalg import lu_factor, lu_solve
from .sylvester import KRONECKER_CAP, build_step_context, solve_step

__all__ = [
    "Certificate",
    "SolverOptions",
    "fixed_point_solve",
    "mmatrix_certificate",
    "newton_shamanskii_solve",
    "newton_solve",
    "solve",
    "structured_certificate",
    "zmatrix_certificate",
]

MONOTONE_SLACK = 1e-12
FIXED_POINT_FACTOR = 50


@dataclass
class SolverOptions:
    tol: float = 1e-13
    max_outer: int = 200
    m: int = 2
    check_monotone: bool = True
    check_mmatrix: bool = True
    X0: Optional[np.ndarray] = None
    keep_iterates: bool = False
    certificate_cap: int = KRONECKER_CAP

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterOutOfRange(f"tol must be positive, got {self.tol}")
        if self.m < 1:
            raise ParameterOutOfRange(f"m must be at least 1, got {self.m}")
        if self.max_outer < 1:
            raise ParameterOutOfRange(f"max_outer must be at least 1, got {self.max_outer}")


@dataclass(frozen=True, eq=False)
class Certificate:
    """Outcome of an M-matrix check. Truthy iff ``K v = e`` with ``v > 0``."""

    ok: bool
    v: Optional[np.ndarray] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def zmatrix_certificate(K):
    """Certify a Z-matrix ``K`` as a nonsingular M-matrix.

    Solves ``K v = e``; a positive solution proves ``K`` is a nonsingular
    M-matrix (``K v > 0`` for some ``v > 0``).
    """
    K = np.asarray(K, dtype=np.float64)
    off = K - np.diag(np.diag(K))
    if (off > 0).any():
        i, j = np.argwhere(off > 0)[0]
        raise NotZMatrix(f"positive off-diagonal entry K[{i}][{j}] = {K[i, j]!r}")
    try:
        v = lu_solve(lu_factor(K), np.ones(K.shape[0]))
    except SingularMatrix:
        return Certificate(False, None, "singular")
    if (v > 0).all():
        return Certificate(True, v)
    return Certificate(False, v, "solution of K v = e is not positive")


def mmatrix_certificate(p, X, cap=KRONECKER_CAP):
    """Check that ``-[(X^T kron A + I kron AX) + I kron B]`` is a nonsingular
    M-matrix by forming it explicitly (``n <= cap`` only)."""
    X = np.asarray(X, dtype=np.float64)
    n = p.n
    if X.shape != (n, n):
        raise DimensionMismatch(f"expected {n}x{n}, got {X.shape}")
    if n > cap:
        raise OracleCapExceeded(f"n={n} exceeds Kronecker certificate cap {cap}")
    I = np.eye(n)
    K = -(np.kron(X.T, p.A) + np.kron(I, p.A @ X) + np.kron(I, p.B))
    return zmatrix_certificate(K)


def structured_certificate(ctx):
    """Same certificate without the Kronecker matrix.

    ``K vec(V) = e`` is the step equation ``M V + N V X = -ones`` already
    factored in ``ctx``. For ``X >= 0`` the Z-sign pattern of ``K`` holds
    by construction, so only positivity of ``V`` needs checking.
    """
    if (ctx.frozen_X < 0).any():
        return Certificate(False, None, "X has negative entries")
    V = solve_step(ctx, -np.ones((ctx.n, ctx.n)))
    v = V.reshape(-1, order="F")
    if (v > 0).all():
        return Certificate(True, v)
    return Certificate(False, v, "solution of K v = e is not positive")


def _initial(p, opts):
    if opts.X0 is None:
        return np.zeros((p.n, p.n))
    X = np.array(opts.X0, dtype=np.float64, copy=True)
    if X.shape != (p.n, p.n):
        raise DimensionMismatch(f"X0 has shape {X.shape}, expected {(p.n, p.n)}")
    return X


def _monotone_step(X, Xn, QXn):
    return not ((Xn < X - MONOTONE_SLACK).any() or (QXn < -MONOTONE_SLACK).any())


def _newton_like(p, opts, m):
    start = perf_counter()
    report = SolveReport()
    X = _initial(p, opts)
    QX = q_apply(p, X)
    if opts.check_mmatrix:
        if (X < 0).any():
            raise CertificateFailure("X0 has negative entries")
        if (QX < -MONOTONE_SLACK).any():
            raise CertificateFailure("Q(X0) has negative entries")
    report.residual_history.append((0, residual_nres(p, X, QX)))
    if opts.keep_iterates:
        report.iterates.append(X.copy())
    kron_checks = p.n <= opts.certificate_cap

    while report.nres > opts.tol:
        if report.outer_steps >= opts.max_outer:
            report.elapsed = perf_counter() - start
            raise MaxIterations(
                f"no convergence in {opts.max_outer} outer steps "
                f"(NRes={report.nres:.3e})", report)
        ctx = build_step_context(p, X)
        report.outer_steps += 1
        report.min_pivot_ratio = min(report.min_pivot_ratio, ctx.min_pivot_ratio())
        if opts.check_mmatrix and (kron_checks or report.outer_steps == 1):
            cert = mmatrix_certificate(p, X, opts.certificate_cap) if kron_checks \
                else structured_certificate(ctx)
            if not cert:
                report.mmatrix_ok = False
                raise CertificateFailure(
                    f"M-matrix certificate failed at outer step "
                    f"{report.outer_steps}: {cert.reason}")
        for _ in range(m):
            Xn = X + solve_step(ctx, -QX)
            QXn = q_apply(p, Xn)
            report.inner_steps += 1
            if not _monotone_step(X, Xn, QXn):
                report.monotone_ok = False
                if opts.check_monotone:
                    raise MonotonicityViolation(
                        f"monotone chain broken at inner step {report.inner_steps}")
            X, QX = Xn, QXn
            report.residual_history.append((report.inner_steps, residual_nres(p, X, QX)))
            if opts.keep_iterates:
                report.iterates.append(X.copy())
            if report.nres <= opts.tol:
                break

    report.converged = True
    report.elapsed = perf_counter() - start
    return X, report


def newton_solve(p, opts=None):
    """Newton's method: one derivative factorization per update."""
    return _newton_like(p, opts or SolverOptions(), 1)


def newton_shamanskii_solve(p, opts=None):
    """Newton-Shamanskii: each factorization is reused for ``opts.m`` updates."""
    opts = opts or SolverOptions()
    return _newton_like(p, opts, opts.m)


def fixed_point_solve(p, opts=None):
    """Natural fixed-point iteration ``X <- A X^2 + (B + I) X + C``.

    Linearly convergent; runs at most ``50 * max_outer`` steps.
    """
    opts = opts or SolverOptions()
    start = perf_counter()
    report = SolveReport()
    X = _initial(p, opts)
    QX = q_apply(p, X)
    report.residual_history.append((0, residual_nres(p, X, QX)))
    if opts.keep_iterates:
        report.iterates.append(X.copy())
    limit = FIXED_POINT_FACTOR * opts.max_outer
    while report.nres > opts.tol:
        if report.inner_steps >= limit:
            report.elapsed = perf_counter() - start
            raise MaxIterations(
                f"fixed-point iteration did not converge in {limit} steps "
                f"(NRes={report.nres:.3e})", report)
        Xn = X + QX
        QXn = q_apply(p, Xn)
        report.inner_steps += 1
        report.outer_steps += 1
        if not _monotone_step(X, Xn, QXn):
            report.monotone_ok = False
            if opts.check_monotone:
                raise MonotonicityViolation(
                    f"fixed-point sequence decreased at step {report.inner_steps}")
        X, QX = Xn, QXn
        report.residual_history.append((report.inner_steps, residual_nres(p, X, QX)))
        if opts.keep_iterates:
            report.iterates.append(X.copy())
    report.converged = True
    report.elapsed = perf_counter() - start
    return X, report


METHODS = {
    "newton": newton_solve,
    "newton-shamanskii": newton_shamanskii_solve,
    "fixed-point": fixed_point_solve,
}


def solve(p, method="newton-shamanskii", opts=None):
    """Dispatch by method name (``newton``, ``newton-shamanskii``, ``fixed-point``)."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ParameterOutOfRange(
            f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return fn(p, opts)
