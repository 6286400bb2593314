"""Assembled-matrix forms of the split operators and one-step maps.

These are brute-force constructions used by the dense reference scheme
and the verification oracles: the operators are probed column by column
through the same curl actions the steppers use, and the one-step maps
are evaluated by direct factorization of the assembled matrices. Only
small grids are supported.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import CapabilityError
from .grid import Coefficients, FieldSet, Medium, YeeGrid
from .operators import apply_a, apply_b
from .schemeids import Formulation, SchemeId

#: largest unknown count accepted for direct-solve machinery
MAX_DIRECT_UNKNOWNS = 10**4

_DENSE_CACHE: dict = {}
_SPARSE_CACHE: dict = {}


def _check_size(grid: YeeGrid) -> int:
    n = grid.num_unknowns
    if n > MAX_DIRECT_UNKNOWNS:
        raise CapabilityError(
            f"grid has {n} unknowns; direct-solve machinery is capped at "
            f"{MAX_DIRECT_UNKNOWNS}"
        )
    return n


def _probe_columns(which: str, grid: YeeGrid, medium: Medium):
    coeffs = Coefficients.from_physics(1.0, medium)  # dt-independent actions
    n = _check_size(grid)
    basis = FieldSet.zeros(grid)
    flat_views = [a.ravel() for a in basis.arrays()]
    offsets = np.cumsum([0] + [a.size for a in basis.arrays()])

    def column(j: int) -> np.ndarray:
        for v, lo, hi in zip(flat_views, offsets[:-1], offsets[1:]):
            if lo <= j < hi:
                v[j - lo] = 1.0
                break
        if which == "A":
            out = apply_a(basis, coeffs, grid).as_vector()
        elif which == "B":
            out = apply_b(basis, coeffs, grid).as_vector()
        else:
            out = (
                apply_a(basis, coeffs, grid).as_vector()
                + apply_b(basis, coeffs, grid).as_vector()
            )
        for v in flat_views:
            v[:] = 0.0
        return out

    return n, column


def split_matrix(which: str, grid: YeeGrid, medium: Medium) -> np.ndarray:
    """Dense matrix of the named operator ('A', 'B', or their sum 'C'),
    assembled by probing unit vectors through the curl actions."""
    key = (which, grid, medium)
    if key not in _DENSE_CACHE:
        n, column = _probe_columns(which, grid, medium)
        mat = np.empty((n, n))
        for j in range(n):
            mat[:, j] = column(j)
        _DENSE_CACHE[key] = mat
    return _DENSE_CACHE[key]


def curl_matrix_sparse(grid: YeeGrid, medium: Medium) -> sp.csr_matrix:
    """Sparse matrix of the full curl operator A + B."""
    key = (grid, medium)
    if key not in _SPARSE_CACHE:
        n, column = _probe_columns("C", grid, medium)
        rows, cols, vals = [], [], []
        for j in range(n):
            col = column(j)
            (nz,) = np.nonzero(col)
            rows.append(nz)
            cols.append(np.full(nz.shape, j, dtype=np.int64))
            vals.append(col[nz])
        mat = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
        _SPARSE_CACHE[key] = mat
    return _SPARSE_CACHE[key]


def _cayley(mat: np.ndarray, tau: float) -> np.ndarray:
    """(I - tau M)^-1 (I + tau M)"""
    n = mat.shape[0]
    eye = np.eye(n)
    return np.linalg.solve(eye - tau * mat, eye + tau * mat)


def one_step_matrix(
    scheme: SchemeId,
    formulation: Formulation,
    grid: YeeGrid,
    medium: Medium,
    dt: float,
) -> np.ndarray:
    """Dense matrix carrying physical fields over one integer step,
    evaluated from the scheme's literal splitting composition.

    For the quarter-offset scheme the map includes its input and output
    processing so that it relates integer-step fields. Both formulations
    of a scheme share one exact map; the float evaluation follows each
    formulation's written composition.
    """
    a = split_matrix("A", grid, medium)
    b = split_matrix("B", grid, medium)
    n = a.shape[0]
    eye = np.eye(n)
    tau = dt / 2.0

    scheme = SchemeId(scheme)
    if scheme in (SchemeId.ADI, SchemeId.DOUGLAS_GUNN):
        return np.linalg.solve(
            eye - tau * b,
            (eye + tau * a) @ np.linalg.solve(eye - tau * a, eye + tau * b),
        )
    if scheme == SchemeId.DYAKONOV:
        if formulation == Formulation.ORIGINAL:
            star = np.linalg.solve(eye - tau * a, (eye + tau * a) @ (eye + tau * b))
            return np.linalg.solve(eye - tau * b, star)
        return np.linalg.solve(
            eye - tau * b,
            (eye + tau * a) @ np.linalg.solve(eye - tau * a, eye + tau * b),
        )
    if scheme == SchemeId.LOD1:
        return _cayley(b, tau) @ _cayley(a, tau)
    if scheme == SchemeId.SS2:
        half = _cayley(a, dt / 4.0)
        return half @ _cayley(b, tau) @ half
    if scheme == SchemeId.LOD2:
        main = _cayley(b, tau) @ _cayley(a, tau)
        into = _cayley(b, dt / 4.0)
        out = np.linalg.solve(eye + (dt / 4.0) * b, eye - (dt / 4.0) * b)
        return out @ main @ into
    if scheme == SchemeId.CRANK_NICOLSON_REF:
        return _cayley(a + b, tau)
    raise ValueError(f"no dense map for scheme {scheme!r}")


def delta_star_matrix(grid: YeeGrid, medium: Medium, dt: float) -> np.ndarray:
    """Dense map of the first delta-formulation stage:
    (I - (dt/2) A) d = dt (A + B) u."""
    a = split_matrix("A", grid, medium)
    b = split_matrix("B", grid, medium)
    eye = np.eye(a.shape[0])
    return np.linalg.solve(eye - (dt / 2.0) * a, dt * (a + b))
