"""Component-level update sweeps shared by the time steppers.

Each implicit procedure advances one split operator: the three E
components are solved along their implicit axes (tridiagonal lines),
then the three H components are updated explicitly from the fresh E
solution. The reduced ("fundamental") forms assemble right-hand sides
from stored vectors only; the original forms carry the operator
applications of the textbook splitting formulas.

Every per-cell update statement registers its per-cell-bundle operation
count with :mod:`implicitfdtd.costs` as it executes, which is what the
runtime flop audit replays against the static model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import costs, tridiag
from .grid import Coefficients, Medium, YeeGrid
from .operators import (
    SplitOperator,
    SplitPair,
    e_to_h_diff,
    h_interior_view,
)


@dataclass(frozen=True)
class PlanEntry:
    """Precomputed factors for one E/H coupling of a procedure."""

    pair: SplitPair
    f_rhs: float  # sign * tau / (eps * delta): E-equation H-difference
    f_expl: float  # sign * tau / (mu * delta): explicit H update
    f_sten: float  # tau^2/(eps mu delta^2): original-form E stencil weight
    f_rhs2: float  # doubled f_rhs for the original-form E equations
    fac: tridiag.TridiagFactorization


@dataclass(frozen=True)
class ProcedurePlan:
    """One updating procedure: a split operator taken over a sub-step."""

    op: SplitOperator
    tau: float
    entries: tuple[PlanEntry, ...]


def make_plan(
    op: SplitOperator,
    tau: float,
    grid: YeeGrid,
    medium: Medium,
    scale: float,
    fac_cache: dict | None = None,
) -> ProcedurePlan:
    """Build the per-pair factors and line factorizations for one
    procedure solving (scale*I - scale*tau*OP).

    ``tau`` may be negative (inverse passes such as quarter-step output
    processing); the line systems depend only on tau^2 and stay
    diagonally dominant.
    """
    bd_eff = tau * tau / (medium.epsilon * medium.mu)
    entries = []
    for pair in op.pairs:
        delta = grid.step(pair.axis)
        key = (pair.axis, bd_eff, scale)
        if fac_cache is not None and key in fac_cache:
            fac = fac_cache[key]
        else:
            n = grid.n(pair.axis) - 1
            diag, sub, sup = tridiag.line_matrix(n, bd_eff, 1.0 / delta**2, scale)
            fac = tridiag.factorize(diag, sub, sup)
            if fac_cache is not None:
                fac_cache[key] = fac
        entries.append(
            PlanEntry(
                pair=pair,
                f_rhs=op.sign * tau / (medium.epsilon * delta),
                f_expl=op.sign * tau / (medium.mu * delta),
                f_sten=bd_eff / delta**2,
                f_rhs2=2.0 * op.sign * tau / (medium.epsilon * delta),
                fac=fac,
            )
        )
    return ProcedurePlan(op=op, tau=tau, entries=tuple(entries))


# ---------------------------------------------------------------------------
# reduced-form sweeps


def fundamental_substep(u, v, plan: ProcedurePlan, combined: bool = True) -> None:
    """One reduced-form procedure acting in place on the field container.

    Solves (I/2 - (tau/2) OP) v = u for the auxiliary v, then replaces
    u <- v - u. With ``combined`` the H part of both updates collapses to
    a single accumulation into u; otherwise the auxiliary h is
    materialized in ``v`` first (needed when it is output).
    """
    for en in plan.entries:
        p = en.pair
        e = u.get(p.e)
        hv = h_interior_view(u, p.h)
        # RHS: 1 factor multiply, diff + add; fused post-solve subtraction
        rhs = e + en.f_rhs * np.diff(hv, axis=p.axis)
        costs.tally(1, 3, "implicit")
        ve = tridiag.solve_lines(en.fac, rhs, p.axis)
        v.set(p.e, ve)
        np.subtract(ve, e, out=e)
    for en in plan.entries:
        p = en.pair
        ve = v.get(p.e)
        if combined:
            hv = h_interior_view(u, p.h)
            hv += e_to_h_diff(ve, p.axis, en.f_expl)
            costs.tally(1, 2, "explicit")
        else:
            hu = u.get(p.h)
            vh = v.get(p.h)
            np.multiply(hu, 2.0, out=vh)
            vhv = h_interior_view(v, p.h)
            vhv += e_to_h_diff(ve, p.axis, en.f_expl)
            np.subtract(vh, hu, out=hu)
            costs.tally(2, 3, "explicit")


def pr_implicit_half(f, v, plan: ProcedurePlan) -> None:
    """Auxiliary refresh plus implicit solve of one alternating-direction
    procedure: v.e <- f.e - v.e, then f.e <- solve(v.e + coef * diff v.h)."""
    for en in plan.entries:
        p = en.pair
        e = f.get(p.e)
        ve = v.get(p.e)
        np.subtract(e, ve, out=ve)
        hv = h_interior_view(v, p.h)
        rhs = ve + en.f_rhs * np.diff(hv, axis=p.axis)
        costs.tally(1, 3, "implicit")
        f.set(p.e, tridiag.solve_lines(en.fac, rhs, p.axis))


def pr_explicit_combined(f, v, plan: ProcedurePlan) -> None:
    """Collapsed explicit H update: v.h += coef * diff f.e."""
    for en in plan.entries:
        p = en.pair
        hv = h_interior_view(v, p.h)
        hv += e_to_h_diff(f.get(p.e), p.axis, en.f_expl)
        costs.tally(1, 2, "explicit")


def pr_explicit_materialize(f, v, plan: ProcedurePlan, update_aux: bool) -> None:
    """Explicit H update writing the working H fields: f.h <- 2 v.h +
    coef * diff f.e; optionally follow with v.h <- f.h - v.h."""
    for en in plan.entries:
        p = en.pair
        fh = f.get(p.h)
        vh = v.get(p.h)
        np.multiply(vh, 2.0, out=fh)
        fhv = h_interior_view(f, p.h)
        fhv += e_to_h_diff(f.get(p.e), p.axis, en.f_expl)
        if update_aux:
            np.subtract(fh, vh, out=vh)
            costs.tally(2, 3, "explicit")
        else:
            costs.tally(2, 2, "explicit")


def pr_resolve_pending_aux(f, v) -> None:
    """Deferred auxiliary refresh after a step that materialized H:
    v.h <- f.h - v.h."""
    from .grid import H_COMPONENTS

    for name in H_COMPONENTS:
        np.subtract(f.get(name), v.get(name), out=v.get(name))
        costs.tally(0, 1, "implicit")


# ---------------------------------------------------------------------------
# original-form sweeps


def _dirichlet_stencil(e: np.ndarray, axis: int, c: float) -> np.ndarray:
    """c*(e_+ + e_-) + (1 - 2c)*e along ``axis`` with pinned-zero ends."""
    out = (1.0 - 2.0 * c) * e
    nd = e.ndim
    lo = [slice(None)] * nd
    hi = [slice(None)] * nd
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    out[tuple(lo)] += c * e[tuple(hi)]
    out[tuple(hi)] += c * e[tuple(lo)]
    return out


def lod_original_substep(src, dst, plan: ProcedurePlan) -> None:
    """One textbook locally-one-dimensional procedure
    (I - tau OP) dst = (I + tau OP) src, component level."""
    for en in plan.entries:
        p = en.pair
        hv = h_interior_view(src, p.h)
        # folded stencil: two weight multiplies, doubled H difference
        rhs = _dirichlet_stencil(src.get(p.e), p.axis, en.f_sten)
        rhs += en.f_rhs2 * np.diff(hv, axis=p.axis)
        costs.tally(3, 4, "implicit")
        dst.set(p.e, tridiag.solve_lines(en.fac, rhs, p.axis))
    for en in plan.entries:
        p = en.pair
        dh = dst.get(p.h)
        np.copyto(dh, src.get(p.h))
        view = h_interior_view(dst, p.h)
        # single multiply of the summed old/new four-point difference
        view += e_to_h_diff(src.get(p.e) + dst.get(p.e), p.axis, en.f_expl)
        costs.tally(1, 4, "explicit")


@dataclass(frozen=True)
class AdiOrigEntry:
    """Factors for one conventionally fused alternating-direction
    procedure (implicit in one operator, explicit RHS from the other)."""

    pair: SplitPair  # implicit coupling (e, h, axis)
    f_own: float  # implicit-op H difference factor
    other_h: str  # H partner of e under the explicit operator
    other_axis: int
    f_other: float
    cross_e: str  # E partner of h under the explicit operator
    cross_axis: int
    f_cross: float  # mixed second-difference factor
    fd_own: float  # implicit-op explicit-H factor
    fd_other: float  # explicit-op explicit-H factor
    fac: tridiag.TridiagFactorization


def make_adi_original_plan(
    implicit_op: SplitOperator,
    explicit_op: SplitOperator,
    tau: float,
    grid: YeeGrid,
    medium: Medium,
    fac_cache: dict | None = None,
) -> tuple[AdiOrigEntry, ...]:
    by_e = {p.e: p for p in explicit_op.pairs}
    by_h = {p.h: p for p in explicit_op.pairs}
    bd_eff = tau * tau / (medium.epsilon * medium.mu)
    entries = []
    for pair in implicit_op.pairs:
        delta = grid.step(pair.axis)
        other = by_e[pair.e]
        cross = by_h[pair.h]
        key = (pair.axis, bd_eff, 1.0)
        if fac_cache is not None and key in fac_cache:
            fac = fac_cache[key]
        else:
            n = grid.n(pair.axis) - 1
            diag, sub, sup = tridiag.line_matrix(n, bd_eff, 1.0 / delta**2, 1.0)
            fac = tridiag.factorize(diag, sub, sup)
            if fac_cache is not None:
                fac_cache[key] = fac
        entries.append(
            AdiOrigEntry(
                pair=pair,
                f_own=implicit_op.sign * tau / (medium.epsilon * delta),
                other_h=other.h,
                other_axis=other.axis,
                f_other=explicit_op.sign * tau / (medium.epsilon * grid.step(other.axis)),
                cross_e=cross.e,
                cross_axis=cross.axis,
                f_cross=implicit_op.sign
                * explicit_op.sign
                * bd_eff
                / (delta * grid.step(cross.axis)),
                fd_own=implicit_op.sign * tau / (medium.mu * delta),
                fd_other=explicit_op.sign * tau / (medium.mu * grid.step(cross.axis)),
                fac=fac,
            )
        )
    return tuple(entries)


def adi_original_procedure(src, dst, entries: tuple[AdiOrigEntry, ...]) -> None:
    """One conventional alternating-direction half-step
    (I - tau S) dst = (I + tau T) src with fused right-hand sides."""
    for en in entries:
        p = en.pair
        # three factor multiplies: own H diff, other H diff, E cross diff
        rhs = src.get(p.e) + en.f_own * np.diff(
            h_interior_view(src, p.h), axis=p.axis
        )
        rhs += en.f_other * np.diff(h_interior_view(src, en.other_h), axis=en.other_axis)
        rhs += en.f_cross * np.diff(
            e_to_h_diff(src.get(en.cross_e), en.cross_axis, 1.0), axis=p.axis
        )
        costs.tally(3, 8, "implicit")
        dst.set(p.e, tridiag.solve_lines(en.fac, rhs, p.axis))
    for en in entries:
        p = en.pair
        dh = dst.get(p.h)
        np.copyto(dh, src.get(p.h))
        view = h_interior_view(dst, p.h)
        view += e_to_h_diff(src.get(en.cross_e), en.cross_axis, en.fd_other)
        view += e_to_h_diff(dst.get(p.e), p.axis, en.fd_own)
        costs.tally(2, 4, "explicit")


def schur_solve_operator(rhs_fields, dst, plan: ProcedurePlan) -> None:
    """Solve (I - tau OP) dst = rhs by eliminating H: tridiagonal E
    solves followed by explicit H recovery."""
    for en in plan.entries:
        p = en.pair
        line_rhs = rhs_fields.get(p.e) + en.f_rhs * np.diff(
            h_interior_view(rhs_fields, p.h), axis=p.axis
        )
        costs.tally(1, 2, "implicit")
        dst.set(p.e, tridiag.solve_lines(en.fac, line_rhs, p.axis))
    for en in plan.entries:
        p = en.pair
        dh = dst.get(p.h)
        np.copyto(dh, rhs_fields.get(p.h))
        view = h_interior_view(dst, p.h)
        view += e_to_h_diff(dst.get(p.e), p.axis, en.f_expl)
        costs.tally(1, 2, "explicit")
