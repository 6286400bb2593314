"""Static operation-count model and runtime flop audit.

The static model records, per scheme and formulation, the
multiplications/divisions (M/D) and additions/subtractions (A/S) that one
complete time step spends on the right-hand sides of its updating
equations, counted per six-component cell bundle under the convention
that all multiplicative stencil factors are precomputed: each multiply by
a stored factor is 1 M/D (the 1/2 scalings count as multiplies), each
add or subtract is 1 A/S. Tridiagonal solves are accounted separately at
5 flops per unknown (the factorized Thomas solve spends 5n - 4 on a line
of order n).

The runtime audit replays the same numbers from counters embedded in the
stepper kernels: every per-cell update statement registers its per-bundle
cost as it executes, so a mismatch between implementation structure and
the static table is detected exactly.
"""

from __future__ import annotations

import csv
import io
from contextlib import contextmanager
from dataclasses import dataclass, field

from .errors import CapabilityError
from .schemeids import Formulation, SchemeId

#: flops charged per unknown for one factorized tridiagonal solve
SOLVE_FLOPS_PER_UNKNOWN = 5

#: implicit component solves per updating procedure (one per E component)
SOLVES_PER_PROCEDURE = 3

PROCEDURES = {
    SchemeId.ADI: 2,
    SchemeId.LOD1: 2,
    SchemeId.SS2: 3,
    SchemeId.LOD2: 2,
    SchemeId.DYAKONOV: 2,
    SchemeId.DOUGLAS_GUNN: 2,
}

TEMPORAL_ORDER = {
    SchemeId.ADI: 2,
    SchemeId.LOD1: 1,
    SchemeId.SS2: 2,
    SchemeId.LOD2: 2,
    SchemeId.DYAKONOV: 2,
    SchemeId.DOUGLAS_GUNN: 2,
}


@dataclass(frozen=True)
class CostReport:
    """Per-step operation counts for one scheme/formulation pair."""

    scheme: SchemeId
    formulation: Formulation
    md_implicit: int
    as_implicit: int
    md_explicit: int
    as_explicit: int
    for_loops: int
    field_arrays: int
    procedures: int
    temporal_order: int

    @property
    def md_total(self) -> int:
        return self.md_implicit + self.md_explicit

    @property
    def as_total(self) -> int:
        return self.as_implicit + self.as_explicit

    @property
    def combined(self) -> int:
        return self.md_total + self.as_total

    @property
    def flops_per_procedure(self) -> float:
        return self.combined / self.procedures

    @property
    def solve_flops(self) -> int:
        """Tridiagonal solve cost per cell bundle and full step."""
        return SOLVE_FLOPS_PER_UNKNOWN * SOLVES_PER_PROCEDURE * self.procedures

    @property
    def rhs_gain(self) -> float:
        base = _BASELINE
        return base.combined / self.combined

    @property
    def overall_gain(self) -> float:
        base = _BASELINE
        return (base.combined + base.solve_flops) / (self.combined + self.solve_flops)


def _report(scheme, formulation, md_i, as_i, md_e, as_e, loops) -> CostReport:
    return CostReport(
        scheme=scheme,
        formulation=formulation,
        md_implicit=md_i,
        as_implicit=as_i,
        md_explicit=md_e,
        as_explicit=as_e,
        for_loops=loops,
        field_arrays=2,
        procedures=PROCEDURES[scheme],
        temporal_order=TEMPORAL_ORDER[scheme],
    )


# Counts derived by enumerating the component-level updating equations of
# each implementation, two or three procedures per full step:
#
# original ADI, per E equation: three factor multiplies (two single
# H differences and one E cross difference) and 8 add/subtracts; per H
# equation 2 multiplies, 4 add/subtracts.
#
# original LOD, per E equation: folded stencil c*(E+ + E-) + (1-2c)*E plus
# the doubled H difference: 3 multiplies, 4 add/subtracts; per H equation
# one multiply of the summed four-point difference: 1 multiply, 4 A/S.
#
# reduced (fundamental) form, per E equation: one factor multiply and the
# difference, the RHS add, and the fused auxiliary subtraction: 1 M/D,
# 3 A/S; per combined H equation 1 M/D, 2 A/S -> 21 flops per procedure.
_TABLE: dict[tuple[SchemeId, Formulation], CostReport] = {}
for _scheme, _loops in ((SchemeId.ADI, 12),):
    _TABLE[(_scheme, Formulation.ORIGINAL)] = _report(
        _scheme, Formulation.ORIGINAL, 18, 48, 12, 24, _loops
    )
for _scheme, _loops in ((SchemeId.LOD1, 12), (SchemeId.LOD2, 12)):
    _TABLE[(_scheme, Formulation.ORIGINAL)] = _report(
        _scheme, Formulation.ORIGINAL, 18, 24, 6, 24, _loops
    )
_TABLE[(SchemeId.SS2, Formulation.ORIGINAL)] = _report(
    SchemeId.SS2, Formulation.ORIGINAL, 27, 36, 9, 36, 18
)
for _scheme in (SchemeId.ADI, SchemeId.LOD1, SchemeId.LOD2, SchemeId.DYAKONOV,
                SchemeId.DOUGLAS_GUNN):
    _TABLE[(_scheme, Formulation.FUNDAMENTAL)] = _report(
        _scheme, Formulation.FUNDAMENTAL, 6, 18, 6, 12, 12
    )
_TABLE[(SchemeId.SS2, Formulation.FUNDAMENTAL)] = _report(
    SchemeId.SS2, Formulation.FUNDAMENTAL, 9, 27, 9, 18, 18
)

_BASELINE = _TABLE[(SchemeId.ADI, Formulation.ORIGINAL)]

#: schemes shown in the comparison table, column order
TABLE_SCHEMES = (SchemeId.ADI, SchemeId.LOD1, SchemeId.SS2, SchemeId.LOD2)


def static_cost(scheme: SchemeId, formulation: Formulation) -> CostReport:
    """Operation counts for one full step of the given implementation."""
    scheme = SchemeId(scheme)
    formulation = Formulation(formulation)
    if scheme == SchemeId.CRANK_NICOLSON_REF:
        raise CapabilityError("the dense reference scheme is not in the cost model")
    try:
        return _TABLE[(scheme, formulation)]
    except KeyError:
        raise CapabilityError(
            f"no tabulated cost for {scheme.value}/{formulation.value}"
        ) from None


def efficiency_gains(report: CostReport) -> tuple[float, float]:
    """(RHS gain, overall gain) of a report against the original-ADI
    baseline; the overall figure folds in the 5N tridiagonal solve cost
    for the scheme's three implicit component solves per procedure."""
    return (report.rhs_gain, report.overall_gain)


def for_loop_count(scheme: SchemeId, formulation: Formulation) -> int:
    """Full index sweeps per step: 12 for the two-procedure schemes in
    either formulation, 18 for the three-procedure split-step scheme."""
    return static_cost(scheme, formulation).for_loops


# ---------------------------------------------------------------------------
# runtime flop audit


@dataclass
class FlopCounter:
    """Accumulates per-cell-bundle RHS counts and per-line solve flops."""

    md_implicit: int = 0
    as_implicit: int = 0
    md_explicit: int = 0
    as_explicit: int = 0
    loops: int = 0
    solve_lines: int = 0
    solve_flops: int = 0
    max_line_flops: int = 0
    max_line_order: int = 0
    extra_events: list = field(default_factory=list)

    @property
    def md_total(self) -> int:
        return self.md_implicit + self.md_explicit

    @property
    def as_total(self) -> int:
        return self.as_implicit + self.as_explicit


_ACTIVE: FlopCounter | None = None


@contextmanager
def count_flops():
    """Activate flop counting; yields the collecting counter."""
    global _ACTIVE
    previous = _ACTIVE
    counter = FlopCounter()
    _ACTIVE = counter
    try:
        yield counter
    finally:
        _ACTIVE = previous


def tally(md: int, adds: int, phase: str, loops: int = 1) -> None:
    """Register one per-component update sweep (counts per cell bundle)."""
    c = _ACTIVE
    if c is None:
        return
    if phase == "implicit":
        c.md_implicit += md
        c.as_implicit += adds
    else:
        c.md_explicit += md
        c.as_explicit += adds
    c.loops += loops


def tally_solve(n: int, nlines: int) -> None:
    c = _ACTIVE
    if c is None:
        return
    flops = 5 * n - 4 if n > 1 else 1
    c.solve_lines += nlines
    c.solve_flops += flops * nlines
    if flops > c.max_line_flops:
        c.max_line_flops = flops
        c.max_line_order = n


@dataclass(frozen=True)
class AuditReport:
    """Measured per-step counts with the static expectation beside them."""

    scheme: SchemeId
    formulation: Formulation
    steps: int
    md_implicit: float
    as_implicit: float
    md_explicit: float
    as_explicit: float
    for_loops: float
    solve_lines: float
    max_line_flops: int
    max_line_order: int
    expected: CostReport | None
    notes: tuple[str, ...] = ()

    @property
    def md_total(self) -> float:
        return self.md_implicit + self.md_explicit

    @property
    def as_total(self) -> float:
        return self.as_implicit + self.as_explicit

    @property
    def matches_static(self) -> bool:
        e = self.expected
        if e is None:
            return False
        return (
            self.md_implicit == e.md_implicit
            and self.as_implicit == e.as_implicit
            and self.md_explicit == e.md_explicit
            and self.as_explicit == e.as_explicit
            and self.for_loops == e.for_loops
        )


def runtime_flop_audit(scheme, formulation, grid, steps: int, **stepper_kwargs) -> AuditReport:
    """Run an instrumented stepper and compare its registered per-bundle
    RHS counts against the static model.

    Counts are averaged over ``steps`` full steps; zero steps yield zero
    counts. Initialization and output processing are outside the audit,
    matching the static table's main-iteration scope.
    """
    from .steppers import make_stepper
    from .grid import FieldSet

    scheme = SchemeId(scheme)
    formulation = Formulation(formulation)
    stepper = make_stepper(
        scheme, formulation, grid, initial=FieldSet.zeros(grid), **stepper_kwargs
    )
    notes = []
    with count_flops() as counter:
        for _ in range(steps):
            stepper.step()
    div = max(steps, 1)
    try:
        expected = static_cost(scheme, formulation)
    except CapabilityError:
        expected = None
    report = AuditReport(
        scheme=scheme,
        formulation=formulation,
        steps=steps,
        md_implicit=counter.md_implicit / div,
        as_implicit=counter.as_implicit / div,
        md_explicit=counter.md_explicit / div,
        as_explicit=counter.as_explicit / div,
        for_loops=counter.loops / div,
        solve_lines=counter.solve_lines / div,
        max_line_flops=counter.max_line_flops,
        max_line_order=counter.max_line_order,
        expected=expected,
        notes=tuple(notes),
    )
    if expected is not None and steps > 0 and report.as_explicit > expected.as_explicit:
        report = AuditReport(
            **{**report.__dict__, "notes": ("combined-update path disabled",)}
        )
    return report


# ---------------------------------------------------------------------------
# rendering

_ROWS = (
    ("Implicit M/D", lambda r: r.md_implicit),
    ("Implicit A/S", lambda r: r.as_implicit),
    ("Explicit M/D", lambda r: r.md_explicit),
    ("Explicit A/S", lambda r: r.as_explicit),
    ("Total M/D", lambda r: r.md_total),
    ("Total A/S", lambda r: r.as_total),
    ("Total M/D+A/S", lambda r: r.combined),
    ("RHS gain", lambda r: f"{r.rhs_gain:.2f}"),
    ("Overall gain", lambda r: f"{r.overall_gain:.2f}"),
    ("For-loops", lambda r: r.for_loops),
    ("Field arrays", lambda r: r.field_arrays),
    ("Temporal order", lambda r: r.temporal_order),
)


def _table_reports() -> list[CostReport]:
    out = []
    for scheme in TABLE_SCHEMES:
        for formulation in (Formulation.ORIGINAL, Formulation.FUNDAMENTAL):
            out.append(static_cost(scheme, formulation))
    return out


def cost_table_text(reports: list[CostReport] | None = None) -> str:
    """Aligned plain-text comparison table over the tabulated schemes."""
    reports = reports if reports is not None else _table_reports()
    headers = ["Quantity"] + [
        f"{r.scheme.value} {'orig' if r.formulation == Formulation.ORIGINAL else 'new'}"
        for r in reports
    ]
    rows = [[label] + [str(get(r)) for r in reports] for label, get in _ROWS]
    widths = [max(len(row[i]) for row in [headers] + rows) for i in range(len(headers))]
    lines = []
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def cost_table_csv(reports: list[CostReport] | None = None) -> str:
    """CSV rendering of the comparison table, one row per report."""
    reports = reports if reports is not None else _table_reports()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "scheme", "formulation", "md_implicit", "as_implicit",
            "md_explicit", "as_explicit", "md_total", "as_total", "combined",
            "rhs_gain", "overall_gain", "for_loops", "field_arrays",
            "temporal_order",
        ]
    )
    for r in reports:
        writer.writerow(
            [
                r.scheme.value, r.formulation.value, r.md_implicit,
                r.as_implicit, r.md_explicit, r.as_explicit, r.md_total,
                r.as_total, r.combined, f"{r.rhs_gain:.17g}",
                f"{r.overall_gain:.17g}", r.for_loops, r.field_arrays,
                r.temporal_order,
            ]
        )
    return buf.getvalue()
