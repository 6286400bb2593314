"""Constant-coefficient tridiagonal line systems and their reuse.

Every implicit update reduces to lines of the form
(s*I - s*bd*D2) x = r with D2 the Dirichlet second difference, solved by
the Thomas algorithm. The factorization stores reciprocal pivots so a
solve performs no divisions: 2(n-1) multiplies in elimination and
back-substitution plus n reciprocal multiplies and 2(n-1) add/subtracts,
5n - 4 flops in total for a line of order n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import costs
from .errors import SingularMatrixError
from .grid import Coefficients, YeeGrid

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class TridiagFactorization:
    """Bidiagonal (LU) factors of a tridiagonal matrix.

    lower holds the n-1 elimination multipliers, diag_inv the n reciprocal
    pivots, upper the stored superdiagonal. Solving with a factorization
    is deterministic and writes nothing back into the factors.
    """

    n: int
    lower: np.ndarray
    diag_inv: np.ndarray
    upper: np.ndarray

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return solve(self, rhs)

    def solve_many(self, rhs: np.ndarray) -> np.ndarray:
        return solve_many(self, rhs)


def factorize(diag: np.ndarray, sub: np.ndarray, sup: np.ndarray) -> TridiagFactorization:
    """Thomas-algorithm LU split of tridiag(sub, diag, sup).

    Raises :class:`SingularMatrixError` on a (near-)zero pivot; that
    cannot happen for the diagonally dominant line systems built here but
    is kept as a defensive check.
    """
    diag = np.asarray(diag, dtype=float)
    sub = np.asarray(sub, dtype=float)
    sup = np.asarray(sup, dtype=float)
    n = diag.shape[0]
    if n < 1:
        raise ValueError("system order must be >= 1")
    if sub.shape[0] != n - 1 or sup.shape[0] != n - 1:
        raise ValueError("off-diagonals must have length n - 1")

    lower = np.empty(max(n - 1, 0))
    diag_inv = np.empty(n)
    piv = diag[0]
    if piv == 0.0 or not np.isfinite(piv):
        raise SingularMatrixError("zero pivot at row 0")
    diag_inv[0] = 1.0 / piv
    for i in range(1, n):
        w = sub[i - 1] * diag_inv[i - 1]
        lower[i - 1] = w
        piv = diag[i] - w * sup[i - 1]
        if piv == 0.0 or not np.isfinite(piv):
            raise SingularMatrixError(f"zero pivot at row {i}")
        diag_inv[i] = 1.0 / piv
    return TridiagFactorization(n=n, lower=lower, diag_inv=diag_inv, upper=sup.copy())


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _thomas_kernel(lower, diag_inv, upper, rhs):  # pragma: no cover - jit
        n, m = rhs.shape
        x = np.empty_like(rhs)
        for j in range(m):
            x[0, j] = rhs[0, j]
        for i in range(1, n):
            w = lower[i - 1]
            for j in range(m):
                x[i, j] = rhs[i, j] - w * x[i - 1, j]
        dn = diag_inv[n - 1]
        for j in range(m):
            x[n - 1, j] = x[n - 1, j] * dn
        for i in range(n - 2, -1, -1):
            c = upper[i]
            di = diag_inv[i]
            for j in range(m):
                x[i, j] = (x[i, j] - c * x[i + 1, j]) * di
        return x

else:

    def _thomas_kernel(lower, diag_inv, upper, rhs):
        n, _ = rhs.shape
        x = np.empty_like(rhs)
        x[0] = rhs[0]
        for i in range(1, n):
            x[i] = rhs[i] - lower[i - 1] * x[i - 1]
        x[n - 1] = x[n - 1] * diag_inv[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = (x[i] - upper[i] * x[i + 1]) * diag_inv[i]
        return x


def solve_many(f: TridiagFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve one factorized system against many right-hand sides.

    ``rhs`` has shape (n, m): one column per line. Each column receives
    exactly the same arithmetic as a single-line solve.
    """
    rhs = np.ascontiguousarray(rhs, dtype=float)
    if rhs.ndim != 2 or rhs.shape[0] != f.n:
        raise ValueError(f"rhs must have shape ({f.n}, m), got {rhs.shape}")
    costs.tally_solve(f.n, rhs.shape[1])
    return _thomas_kernel(f.lower, f.diag_inv, f.upper, rhs)


def solve(f: TridiagFactorization, rhs: np.ndarray) -> np.ndarray:
    """Forward/backward substitution for a single right-hand side."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (f.n,):
        raise ValueError(f"rhs must have shape ({f.n},), got {rhs.shape}")
    return solve_many(f, rhs.reshape(f.n, 1))[:, 0]


def line_matrix(n: int, bd: float, inv_delta2: float, scale: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(diag, sub, sup) of scale*(I - bd*D2) on n interior nodes.

    Interior stencil weights are (-c, scale + 2c, -c) with
    c = scale*bd*inv_delta2, so every row is diagonally dominant with
    margin exactly ``scale``.
    """
    c = scale * bd * inv_delta2
    diag = np.full(n, scale + 2.0 * c)
    off = np.full(max(n - 1, 0), -c)
    return diag, off, off.copy()


def build_line_system(
    axis: int, coeffs: Coefficients, grid: YeeGrid, scale: float = 0.5
) -> TridiagFactorization:
    """Factorized line system scale*(I - bd * D2_axis) with Dirichlet ends.

    With the default scale 1/2 this is the implicit-update operator of the
    reduced-form schemes; scale 1 gives the textbook-form operator. The
    factorization is built once per axis and shared by every line and
    every time step (the medium is uniform).
    """
    n = grid.n(axis) - 1
    inv_delta2 = 1.0 / grid.step(axis) ** 2
    diag, sub, sup = line_matrix(n, coeffs.bd, inv_delta2, scale)
    return factorize(diag, sub, sup)


def solve_lines(f: TridiagFactorization, rhs: np.ndarray, axis: int) -> np.ndarray:
    """Solve the factorized system along ``axis`` of a 3-D right-hand side,
    one line per remaining index pair."""
    moved = np.moveaxis(rhs, axis, 0)
    flat = moved.reshape(f.n, -1)
    out = solve_many(f, flat)
    return np.ascontiguousarray(np.moveaxis(out.reshape(moved.shape), 0, axis))
