"""Staggered first-difference operators and the two split curl actions.

The full Maxwell curl splits into two operators, each coupling every
electric component to exactly one magnetic component through a single
first derivative:

    first  half (sign +):  (ex, hz, d/dy)  (ey, hx, d/dz)  (ez, hy, d/dx)
    second half (sign -):  (ex, hy, d/dz)  (ey, hz, d/dx)  (ez, hx, d/dy)

Derivatives from H positions to E positions need no boundary data; the
reverse direction references tangential E outside the stored interior,
which the PEC box pins to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AuxFieldSet, Coefficients, FieldSet, H_OWN_AXIS, YeeGrid


def _sl(ndim: int, axis: int, s: slice) -> tuple:
    out = [slice(None)] * ndim
    out[axis] = s
    return tuple(out)


def diff_forward(f: np.ndarray, axis: int, delta: float) -> np.ndarray:
    """(f[i+1] - f[i]) / delta along ``axis``; output is staggered one
    half-cell forward and one entry shorter."""
    if f.shape[axis] < 2:
        raise ValueError(f"axis {axis} extent {f.shape[axis]} < 2")
    return np.diff(f, axis=axis) / delta


def diff_backward(f: np.ndarray, axis: int, delta: float) -> np.ndarray:
    """(f[i] - f[i-1]) / delta along ``axis`` at the interior positions
    between samples; output is one entry shorter."""
    if f.shape[axis] < 2:
        raise ValueError(f"axis {axis} extent {f.shape[axis]} < 2")
    return np.diff(f, axis=axis) / delta


def h_to_e_diff(h: np.ndarray, axis: int, inv_delta: float) -> np.ndarray:
    """Backward difference taking H-position samples to the interior
    E positions bracketed by them (length n -> n-1)."""
    return np.diff(h, axis=axis) * inv_delta


def e_to_h_diff(e: np.ndarray, axis: int, inv_delta: float) -> np.ndarray:
    """Forward difference taking interior E samples to all H positions
    (length n-1 -> n), treating the pinned boundary E values as zero."""
    shape = list(e.shape)
    shape[axis] += 1
    out = np.empty(shape)
    nd = e.ndim
    out[_sl(nd, axis, slice(0, 1))] = e[_sl(nd, axis, slice(0, 1))]
    out[_sl(nd, axis, slice(1, -1))] = np.diff(e, axis=axis)
    out[_sl(nd, axis, slice(-1, None))] = -e[_sl(nd, axis, slice(-1, None))]
    out *= inv_delta
    return out


@dataclass(frozen=True)
class SplitPair:
    """One E/H coupling of a split operator: the E component, the H
    component it exchanges with, and the derivative axis between them."""

    e: str
    h: str
    axis: int


@dataclass(frozen=True)
class SplitOperator:
    """One half of the split curl: three E/H couplings sharing a sign."""

    name: str
    sign: int
    pairs: tuple[SplitPair, ...]


SPLIT_A = SplitOperator(
    name="A",
    sign=+1,
    pairs=(
        SplitPair("ex", "hz", 1),
        SplitPair("ey", "hx", 2),
        SplitPair("ez", "hy", 0),
    ),
)

SPLIT_B = SplitOperator(
    name="B",
    sign=-1,
    pairs=(
        SplitPair("ex", "hy", 2),
        SplitPair("ey", "hz", 0),
        SplitPair("ez", "hx", 1),
    ),
)


def h_interior_view(fields, h_name: str) -> np.ndarray:
    """View of an H array without its own-axis wall planes, aligning it
    with the interior extents of the E components it couples to."""
    arr = fields.get(h_name)
    return arr[_sl(arr.ndim, H_OWN_AXIS[h_name], slice(1, -1))]


def apply_split(
    u, op: SplitOperator, e_factor: float, h_factor: float, grid: YeeGrid
) -> list[tuple[str, np.ndarray]]:
    """Evaluate one split operator on a field container.

    Returns (component, increment) entries; E increments carry
    sign * e_factor / delta, H increments sign * h_factor / delta. H
    increments are full arrays with zeros on the frozen wall planes.
    """
    out = []
    for p in op.pairs:
        inv_delta = 1.0 / grid.step(p.axis)
        h_view = h_interior_view(u, p.h)
        out.append((p.e, (op.sign * e_factor * inv_delta) * np.diff(h_view, axis=p.axis)))
        h_inc = np.zeros(grid.component_shape(p.h))
        own = H_OWN_AXIS[p.h]
        h_inc[_sl(3, own, slice(1, -1))] = e_to_h_diff(
            u.get(p.e), p.axis, op.sign * h_factor * inv_delta
        )
        out.append((p.h, h_inc))
    return out


def _apply(u: FieldSet, op: SplitOperator, coeffs: Coefficients, grid: YeeGrid) -> FieldSet:
    result = FieldSet.zeros(grid, scaling=u.scaling)
    for name, inc in apply_split(u, op, 1.0 / coeffs.epsilon, 1.0 / coeffs.mu, grid):
        result.get(name)[...] = inc
    return result


def apply_a(u: FieldSet, coeffs: Coefficients, grid: YeeGrid) -> FieldSet:
    """Action of the first split operator: e.g. the ex increment is
    (1/eps) d/dy hz, the hz increment (1/mu) d/dy ex."""
    return _apply(u, SPLIT_A, coeffs, grid)


def apply_b(u: FieldSet, coeffs: Coefficients, grid: YeeGrid) -> FieldSet:
    """Action of the second split operator (negated couplings): e.g. the
    ex increment is -(1/eps) d/dz hy."""
    return _apply(u, SPLIT_B, coeffs, grid)


def add_scaled_split(target, u, op: SplitOperator, tau: float, coeffs: Coefficients,
                     grid: YeeGrid) -> None:
    """target += tau * (split operator applied to u), in place.

    Used by the one-shot initialization and conversion passes, where the
    per-step operation accounting does not apply.
    """
    for name, inc in apply_split(
        u, op, tau / coeffs.epsilon, tau / coeffs.mu, grid
    ):
        target.get(name)[...] += inc
