"""Dense kernels: LU with partial pivoting, Householder Hessenberg reduction
and the real Schur decomposition by Francis double-shift QR.

The inner loops are compiled with numba; the public functions take and
return float64 numpy arrays. Matrix products are left to numpy.
"""

from dataclasses import dataclass
from math import copysign, hypot, sqrt

import numpy as np
from numba import njit

from .errors import DimensionMismatch, NoConvergence, NonFinite, SingularMatrix

__all__ = [
    "LuFactorization",
    "SchurFactorization",
    "as_square",
    "hessenberg",
    "lu_factor",
    "lu_solve",
    "norm_inf",
    "real_schur",
]

PIVOT_TOL = 1e-14
DEFLATION_TOL = 1e-14
# absolute deflation floor relative to ||H||_F; needed when a cluster of
# eigenvalues is small compared with the norm and rounding noise dominates
UNIT_ROUNDOFF = np.finfo(np.float64).eps
EXCEPTIONAL_SHIFT_PERIOD = 10


def as_square(A, name="matrix"):
    """Return ``A`` as a finite, C-contiguous float64 square array."""
    a = np.ascontiguousarray(A, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")
    return a


def norm_inf(A):
    """Matrix infinity-norm (maximum absolute row sum); 0 for empty input."""
    a = np.asarray(A, dtype=np.float64)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    return float(np.max(np.sum(np.abs(a), axis=1)))


# --------------------------------------------------------------------------
# LU
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _lu_inplace(a, piv, threshold):
    n = a.shape[0]
    # pivot row copy: the update then has no aliasing and vectorizes
    row = np.empty(n)
    for k in range(n):
        p = k
        big = abs(a[k, k])
        for i in range(k + 1, n):
            if abs(a[i, k]) > big:
                big = abs(a[i, k])
                p = i
        piv[k] = p
        if big <= threshold:
            return k
        if p != k:
            for j in range(n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
        inv = 1.0 / a[k, k]
        for j in range(k + 1, n):
            row[j] = a[k, j]
        for i in range(k + 1, n):
            l = a[i, k] * inv
            a[i, k] = l
            if l != 0.0:
                ai = a[i]
                for j in range(k + 1, n):
                    ai[j] -= l * row[j]
    return -1


@njit(cache=True, nogil=True)
def _lu_solve_inplace(lu, piv, b):
    n = lu.shape[0]
    m = b.shape[1]
    for k in range(n):
        p = piv[k]
        if p != k:
            for j in range(m):
                t = b[k, j]
                b[k, j] = b[p, j]
                b[p, j] = t
    for i in range(n):
        for k in range(i):
            l = lu[i, k]
            if l != 0.0:
                for j in range(m):
                    b[i, j] -= l * b[k, j]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            u = lu[i, k]
            if u != 0.0:
                for j in range(m):
                    b[i, j] -= u * b[k, j]
        inv = 1.0 / lu[i, i]
        for j in range(m):
            b[i, j] *= inv


@dataclass(frozen=True, eq=False)
class LuFactorization:
    """``P A = L U`` with unit lower ``L`` and upper ``U`` packed in ``lu``.

    ``piv[k]`` is the row swapped with row ``k`` at elimination step ``k``.
    """

    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self):
        return self.lu.shape[0]

    @property
    def L(self):
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def U(self):
        return np.triu(self.lu)

    def permutation(self):
        """Row permutation matrix ``P`` with ``P A = L U``."""
        order = np.arange(self.n)
        for k, p in enumerate(self.piv):
            order[[k, p]] = order[[p, k]]
        return np.eye(self.n)[order]

    def min_pivot_ratio(self):
        d = np.abs(np.diag(self.lu))
        if d.size == 0:
            return 1.0
        return float(d.min() / d.max())

    def solve(self, rhs):
        return lu_solve(self, rhs)


def lu_factor(A):
    """Factor a square matrix with partial pivoting.

    Raises ``SingularMatrix`` when a pivot falls below ``1e-14 * ||A||_inf``.
    """
    a = as_square(A).copy()
    n = a.shape[0]
    piv = np.zeros(n, dtype=np.int64)
    threshold = PIVOT_TOL * norm_inf(a)
    info = _lu_inplace(a, piv, threshold)
    if info >= 0:
        raise SingularMatrix(f"zero pivot at elimination step {info} (n={n})")
    a.flags.writeable = False
    piv.flags.writeable = False
    return LuFactorization(a, piv)


def lu_solve(f, rhs):
    """Solve ``A x = rhs`` for a vector or a matrix of right-hand sides."""
    b = np.array(rhs, dtype=np.float64, order="C", copy=True)
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    if b.ndim != 2 or b.shape[0] != f.n:
        raise DimensionMismatch(
            f"right-hand side of shape {np.shape(rhs)} does not match n={f.n}"
        )
    _lu_solve_inplace(f.lu, f.piv, b)
    return b[:, 0] if vector else b


# --------------------------------------------------------------------------
# Hessenberg reduction
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _hessenberg_inplace(H, Q):
    n = H.shape[0]
    v = np.zeros(n)
    w = np.zeros(n)
    for k in range(n - 2):
        tail = 0.0
        for i in range(k + 2, n):
            tail += H[i, k] * H[i, k]
        if tail == 0.0:
            continue
        x0 = H[k + 1, k]
        alpha = -copysign(sqrt(x0 * x0 + tail), x0)
        v[k + 1] = x0 - alpha
        for i in range(k + 2, n):
            v[i] = H[i, k]
        tau = 2.0 / (v[k + 1] * v[k + 1] + tail)
        # H <- P H on rows k+1.., columns k..
        for j in range(k, n):
            w[j] = 0.0
        for i in range(k + 1, n):
            vi = v[i]
            for j in range(k, n):
                w[j] += vi * H[i, j]
        for i in range(k + 1, n):
            f = tau * v[i]
            for j in range(k, n):
                H[i, j] -= f * w[j]
        # H <- H P and Q <- Q P on columns k+1..
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += H[i, j] * v[j]
            s *= tau
            for j in range(k + 1, n):
                H[i, j] -= s * v[j]
            s = 0.0
            for j in range(k + 1, n):
                s += Q[i, j] * v[j]
            s *= tau
            for j in range(k + 1, n):
                Q[i, j] -= s * v[j]
        H[k + 1, k] = alpha
        for i in range(k + 2, n):
            H[i, k] = 0.0
        v[k + 1] = 0.0
        for i in range(k + 2, n):
            v[i] = 0.0


def hessenberg(A):
    """Householder reduction ``A = Q H Q^T`` with ``H`` upper Hessenberg.

    Columns that are already zero below the subdiagonal are left untouched,
    so a Hessenberg input comes back bit-identical with ``Q = I``.
    """
    H = as_square(A).copy()
    Q = np.eye(H.shape[0])
    _hessenberg_inplace(H, Q)
    return Q, H


# --------------------------------------------------------------------------
# Real Schur form
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _francis_inplace(H, Z, tol, floor, max_its, period):
    """Francis double-shift QR on Hessenberg ``H``, accumulating into ``Z``.

    Returns -1 on success or the active bottom index that failed to deflate.
    """
    n = H.shape[0]
    hnorm = 0.0
    for i in range(n):
        for j in range(n):
            hnorm += H[i, j] * H[i, j]
    hnorm = sqrt(hnorm)
    small = floor * hnorm
    hi = n - 1
    its = 0
    while hi >= 1:
        l = hi
        while l > 0:
            s = abs(H[l - 1, l - 1]) + abs(H[l, l])
            if s == 0.0:
                s = hnorm
            if abs(H[l, l - 1]) <= tol * s or abs(H[l, l - 1]) <= small:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        if l == hi - 1:
            hi -= 2
            its = 0
            continue
        its += 1
        if its > max_its:
            return hi
        if its % period == 0:
            sh = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2])
            s_sum = 1.5 * sh
            s_prod = sh * sh
        else:
            s_sum = H[hi - 1, hi - 1] + H[hi, hi]
            s_prod = H[hi - 1, hi - 1] * H[hi, hi] - H[hi - 1, hi] * H[hi, hi - 1]
        x = H[l, l] * H[l, l] + H[l, l + 1] * H[l + 1, l] - s_sum * H[l, l] + s_prod
        y = H[l + 1, l] * (H[l, l] + H[l + 1, l + 1] - s_sum)
        z = H[l + 1, l] * H[l + 2, l + 1]
        for k in range(l, hi - 1):
            nrm = sqrt(x * x + y * y + z * z)
            if nrm != 0.0:
                alpha = -copysign(nrm, x)
                v0 = x - alpha
                v1 = y
                v2 = z
                tau = 2.0 / (v0 * v0 + v1 * v1 + v2 * v2)
                r = k - 1 if k > l else l
                for j in range(r, n):
                    s = tau * (v0 * H[k, j] + v1 * H[k + 1, j] + v2 * H[k + 2, j])
                    H[k, j] -= s * v0
                    H[k + 1, j] -= s * v1
                    H[k + 2, j] -= s * v2
                rmax = k + 3 if k + 3 < hi else hi
                for i in range(rmax + 1):
                    s = tau * (H[i, k] * v0 + H[i, k + 1] * v1 + H[i, k + 2] * v2)
                    H[i, k] -= s * v0
                    H[i, k + 1] -= s * v1
                    H[i, k + 2] -= s * v2
                for i in range(n):
                    s = tau * (Z[i, k] * v0 + Z[i, k + 1] * v1 + Z[i, k + 2] * v2)
                    Z[i, k] -= s * v0
                    Z[i, k + 1] -= s * v1
                    Z[i, k + 2] -= s * v2
                if k > l:
                    H[k, k - 1] = alpha
                    H[k + 1, k - 1] = 0.0
                    H[k + 2, k - 1] = 0.0
            x = H[k + 1, k]
            y = H[k + 2, k]
            if k < hi - 2:
                z = H[k + 3, k]
        nrm = hypot(x, y)
        if nrm != 0.0:
            c = x / nrm
            s = y / nrm
            for j in range(hi - 2, n):
                a = H[hi - 1, j]
                b = H[hi, j]
                H[hi - 1, j] = c * a + s * b
                H[hi, j] = -s * a + c * b
            for i in range(hi + 1):
                a = H[i, hi - 1]
                b = H[i, hi]
                H[i, hi - 1] = c * a + s * b
                H[i, hi] = -s * a + c * b
            for i in range(n):
                a = Z[i, hi - 1]
                b = Z[i, hi]
                Z[i, hi - 1] = c * a + s * b
                Z[i, hi] = -s * a + c * b
            H[hi - 1, hi - 2] = nrm
            H[hi, hi - 2] = 0.0
    return -1


@njit(cache=True, nogil=True)
def _split_real_blocks(T, Z):
    """Triangularize 2x2 diagonal blocks whose eigenvalues are real."""
    n = T.shape[0]
    i = 0
    while i < n - 1:
        if T[i + 1, i] == 0.0:
            i += 1
            continue
        a = T[i, i]
        b = T[i, i + 1]
        c = T[i + 1, i]
        d = T[i + 1, i + 1]
        p = 0.5 * (a - d)
        disc = p * p + b * c
        if disc >= 0.0:
            lam = 0.5 * (a + d) + copysign(sqrt(disc), p)
            # eigenvector for lam, from whichever row is better scaled
            u0, u1 = b, lam - a
            w0, w1 = lam - d, c
            if hypot(w0, w1) > hypot(u0, u1):
                u0, u1 = w0, w1
            nrm = hypot(u0, u1)
            cs = u0 / nrm
            sn = u1 / nrm
            for j in range(i, n):
                x = T[i, j]
                y = T[i + 1, j]
                T[i, j] = cs * x + sn * y
                T[i + 1, j] = -sn * x + cs * y
            for r in range(i + 2):
                x = T[r, i]
                y = T[r, i + 1]
                T[r, i] = cs * x + sn * y
                T[r, i + 1] = -sn * x + cs * y
            for r in range(n):
                x = Z[r, i]
                y = Z[r, i + 1]
                Z[r, i] = cs * x + sn * y
                Z[r, i + 1] = -sn * x + cs * y
            T[i + 1, i] = 0.0
        i += 2


@dataclass(frozen=True, eq=False)
class SchurFactorization:
    """``A = Q T Q^T`` with orthogonal ``Q`` and quasi-upper-triangular ``T``.

    ``blocks`` lists the diagonal block sizes (1 or 2) from top to bottom;
    every 2x2 block carries a complex-conjugate eigenvalue pair.
    """

    Q: np.ndarray
    T: np.ndarray
    blocks: tuple

    def block_starts(self):
        starts = []
        j = 0
        for size in self.blocks:
            starts.append(j)
            j += size
        return starts

    def eigenvalues(self):
        T = self.T
        out = []
        for j, size in zip(self.block_starts(), self.blocks):
            if size == 1:
                out.append(complex(T[j, j]))
            else:
                a, b, c, d = T[j, j], T[j, j + 1], T[j + 1, j], T[j + 1, j + 1]
                mean = 0.5 * (a + d)
                im = sqrt(-(0.25 * (a - d) ** 2 + b * c))
                out.extend([complex(mean, im), complex(mean, -im)])
        return np.array(out)


def _block_structure(T):
    n = T.shape[0]
    blocks = []
    j = 0
    while j < n:
        if j + 1 < n and T[j + 1, j] != 0.0:
            blocks.append(2)
            j += 2
        else:
            blocks.append(1)
            j += 1
    return tuple(blocks)


def real_schur(A, max_sweeps=None):
    """Real Schur decomposition via Hessenberg reduction and Francis QR.

    ``max_sweeps`` bounds the QR sweeps spent on any single deflation
    (default ``30 n``); exceeding it raises ``NoConvergence``.
    """
    a = as_square(A)
    n = a.shape[0]
    if max_sweeps is None:
        max_sweeps = 30 * max(n, 1)
    Q, T = hessenberg(a)
    info = _francis_inplace(T, Q, DEFLATION_TOL, UNIT_ROUNDOFF, max_sweeps,
                            EXCEPTIONAL_SHIFT_PERIOD)
    if info >= 0:
        raise NoConvergence(
            f"QR iteration failed to deflate at index {info} within {max_sweeps} sweeps"
        )
    _split_real_blocks(T, Q)
    T[np.tril_indices(n, -2)] = 0.0
    Q.flags.writeable = False
    T.flags.writeable = False
    return SchurFactorization(Q, T, _block_structure(T))
