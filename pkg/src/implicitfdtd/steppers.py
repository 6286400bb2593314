"""Time steppers: every scheme in its original and reduced formulations.

All steppers share the state conventions of the component kernels: the
electric components are implicit (tridiagonal line solves), the magnetic
components explicit. Original forms march two physical field buffers;
reduced forms march one working field container plus one auxiliary
container in place, which keeps every scheme within two six-component
field arrays.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels, sources
from .dense import MAX_DIRECT_UNKNOWNS, curl_matrix_sparse
from .errors import CapabilityError
from .grid import (
    AuxFieldSet,
    Coefficients,
    DOUBLED,
    FieldSet,
    H_COMPONENTS,
    Medium,
    PHYSICAL,
    YeeGrid,
)
from .operators import SPLIT_A, SPLIT_B, add_scaled_split
from .schemeids import Formulation, SchemeId


class Stepper:
    """Common stepping interface.

    Construction fully initializes the scheme (input processing
    included), ``step()`` advances one full time step in place, and
    ``output()`` returns physically scaled fields at the current integer
    step without disturbing the iteration state.
    """

    scheme: SchemeId
    formulation: Formulation

    def __init__(self, grid: YeeGrid, medium: Medium, dt: float, source=None):
        self.grid = grid
        self.medium = medium
        self.dt = float(dt)
        self.coeffs = Coefficients.from_physics(self.dt, medium)
        self.step_index = 0
        self.source = tuple(source) if source else ()
        for term in self.source:
            term.validate(grid)
        self._fac_cache: dict = {}

    @property
    def time(self) -> float:
        return self.step_index * self.dt

    def step(self) -> None:
        raise NotImplementedError

    def run(self, steps: int) -> None:
        for _ in range(steps):
            self.step()

    def output(self) -> FieldSet:
        raise NotImplementedError

    @property
    def persistent_field_arrays(self) -> int:
        """Number of six-component field arrays held across steps."""
        raise NotImplementedError

    def _inject(self, fields, t: float) -> None:
        if self.source:
            factor = 2.0 if getattr(fields, "scaling", PHYSICAL) == DOUBLED else 1.0
            sources.inject(fields, self.source, t, factor)


# ---------------------------------------------------------------------------
# alternating-direction schemes


class AdiOriginal(Stepper):
    """Conventional alternating-direction stepper: each half step is
    implicit in one split operator with the other applied on the
    right-hand side, fused at component level."""

    scheme = SchemeId.ADI
    formulation = Formulation.ORIGINAL

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None):
        super().__init__(grid, medium, dt, source)
        tau = self.dt / 2.0
        self._plan1 = kernels.make_adi_original_plan(
            SPLIT_A, SPLIT_B, tau, grid, medium, self._fac_cache
        )
        self._plan2 = kernels.make_adi_original_plan(
            SPLIT_B, SPLIT_A, tau, grid, medium, self._fac_cache
        )
        self.u = initial.copy()
        self._buf = FieldSet.zeros(grid)

    def step(self) -> None:
        self._inject(self.u, self.time)
        kernels.adi_original_procedure(self.u, self._buf, self._plan1)
        self.u, self._buf = self._buf, self.u
        self._inject(self.u, self.time + 0.5 * self.dt)
        kernels.adi_original_procedure(self.u, self._buf, self._plan2)
        self.u, self._buf = self._buf, self.u
        self.step_index += 1

    def output(self) -> FieldSet:
        return self.u.copy()

    @property
    def persistent_field_arrays(self) -> int:
        return 2


class _ReducedAlternating(Stepper):
    """Shared engine of the reduced alternating-direction iteration:

        v <- fields - v
        solve (I/2 - (dt/4) A) fields_E, combined H accumulation
        v <- fields - v
        solve (I/2 - (dt/4) B) fields_E, combined H accumulation

    ``doubled`` selects whether the working fields carry twice the
    physical values (classic alternating-direction bookkeeping) or the
    physical values directly (the two-stage factored variant). The H part
    of the working fields is only materialized when requested; the
    deferred auxiliary refresh is resolved at the start of the next step.
    """

    doubled: bool

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None, track_h=False):
        super().__init__(grid, medium, dt, source)
        tau = self.dt / 2.0
        self._plan_a = kernels.make_plan(
            SPLIT_A, tau, grid, medium, 0.5, self._fac_cache
        )
        self._plan_b = kernels.make_plan(
            SPLIT_B, tau, grid, medium, 0.5, self._fac_cache
        )
        self.track_h = track_h
        if self.doubled:
            self.fields = initial.scaled(2.0, DOUBLED)
            aux = initial.copy()
            add_scaled_split(aux, initial, SPLIT_B, -tau, self.coeffs, grid)
        else:
            self.fields = initial.copy()
            aux = initial.scaled(0.5, PHYSICAL)
            add_scaled_split(aux, initial, SPLIT_B, -tau / 2.0, self.coeffs, grid)
        self.aux = AuxFieldSet(*(a if isinstance(a, np.ndarray) else a for a in aux.arrays()))
        self._h_pending = True  # aux H still holds the init-time value
        self._h_fresh = True  # fields.H is valid at the current step

    def step(self, emit_h: bool | None = None, capture_half: FieldSet | None = None) -> None:
        emit = self.track_h if emit_h is None else emit_h
        f, v = self.fields, self.aux
        if self._h_pending:
            kernels.pr_resolve_pending_aux(f, v)
            self._h_pending = False
        self._inject(f, self.time)
        kernels.pr_implicit_half(f, v, self._plan_a)
        if capture_half is not None:
            kernels.pr_explicit_materialize(f, v, self._plan_a, update_aux=True)
            capture_half.copy_from(f)
        else:
            kernels.pr_explicit_combined(f, v, self._plan_a)
        self._inject(f, self.time + 0.5 * self.dt)
        kernels.pr_implicit_half(f, v, self._plan_b)
        if emit:
            kernels.pr_explicit_materialize(f, v, self._plan_b, update_aux=False)
            self._h_pending = True
            self._h_fresh = True
        else:
            kernels.pr_explicit_combined(f, v, self._plan_b)
            self._h_fresh = False
        self.step_index += 1

    def _require_fresh_h(self) -> None:
        if not self._h_fresh:
            raise RuntimeError(
                "working H fields are stale; step with emit_h=True (or set "
                "track_h) on steps whose output is needed"
            )

    @property
    def persistent_field_arrays(self) -> int:
        return 2


class AdiFundamental(_ReducedAlternating):
    """Reduced alternating-direction stepper marching doubled fields."""

    scheme = SchemeId.ADI
    formulation = Formulation.FUNDAMENTAL
    doubled = True

    def output(self) -> FieldSet:
        self._require_fresh_h()
        return self.fields.scaled(0.5, PHYSICAL)


class DyakonovFundamental(_ReducedAlternating):
    """Reduced two-stage factored stepper; identical iteration shape, but
    the working fields are physical and the auxiliary is half-scaled, so
    output needs no normalization. The intermediate starred solution of
    the original form is recoverable as twice the mid-step auxiliary."""

    scheme = SchemeId.DYAKONOV
    formulation = Formulation.FUNDAMENTAL
    doubled = False

    def __init__(self, *args, record_u_star: bool = False, **kwargs):
        super().__init__(*args, **kwargs)
        self.record_u_star = record_u_star
        self.u_star: FieldSet | None = None

    def step(self, emit_h: bool | None = None, capture_half: FieldSet | None = None) -> None:
        if self.record_u_star and capture_half is None:
            capture_half = FieldSet.zeros(self.grid)
            super().step(emit_h=emit_h, capture_half=capture_half)
            # aux currently holds v at the post-A-stage half index on its
            # E side only after the B stage ran; reconstruct from capture
            self.u_star = None  # replaced below
            self._set_u_star()
        else:
            super().step(emit_h=emit_h, capture_half=capture_half)

    def _set_u_star(self) -> None:
        # u* = 2 v^{n+1/2}; the half-index auxiliary was consumed in
        # place, so recover it from the captured half-step fields:
        # v^{n+1/2} = fields^{n+1/2} - v^n is already folded in; instead
        # keep it simple and recompute on demand in tests via capture.
        raise NotImplementedError(
            "use DyakonovFundamental.step_with_u_star() to record u*"
        )

    def step_with_u_star(self) -> FieldSet:
        """Advance one step and return the original form's intermediate
        starred solution, equal to twice the mid-step auxiliary."""
        f, v = self.fields, self.aux
        if self._h_pending:
            kernels.pr_resolve_pending_aux(f, v)
            self._h_pending = False
        self._inject(f, self.time)
        kernels.pr_implicit_half(f, v, self._plan_a)
        kernels.pr_explicit_materialize(f, v, self._plan_a, update_aux=True)
        u_star = FieldSet(
            *(2.0 * a for a in v.arrays()), scaling=PHYSICAL
        )
        self._inject(f, self.time + 0.5 * self.dt)
        kernels.pr_implicit_half(f, v, self._plan_b)
        kernels.pr_explicit_materialize(f, v, self._plan_b, update_aux=False)
        self._h_pending = True
        self._h_fresh = True
        self.step_index += 1
        return u_star

    def output(self) -> FieldSet:
        self._require_fresh_h()
        return self.fields.copy()


class DyakonovOriginal(Stepper):
    """Two-stage factored stepper in its textbook form: a starred
    solution from (I - tau A) u* = (I + tau A)(I + tau B) u, then
    (I - tau B) u' = u*."""

    scheme = SchemeId.DYAKONOV
    formulation = Formulation.ORIGINAL

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None):
        super().__init__(grid, medium, dt, source)
        tau = self.dt / 2.0
        self._tau = tau
        self._plan_a = kernels.make_plan(SPLIT_A, tau, grid, medium, 1.0, self._fac_cache)
        self._plan_b = kernels.make_plan(SPLIT_B, tau, grid, medium, 1.0, self._fac_cache)
        self.u = initial.copy()
        self._buf = FieldSet.zeros(grid)

    def step(self) -> None:
        grid, coeffs, tau = self.grid, self.coeffs, self._tau
        self._inject(self.u, self.time)
        # w = (I + tau A)(I + tau B) u, operator products evaluated literally
        z = self.u.copy()
        add_scaled_split(z, self.u, SPLIT_B, tau, coeffs, grid)
        w = z.copy()
        add_scaled_split(w, z, SPLIT_A, tau, coeffs, grid)
        # operator application cost: one factor multiply, diff and add per
        # component per application
        import implicitfdtd.costs as costs

        costs.tally(6, 12, "implicit", loops=6)
        costs.tally(6, 12, "implicit", loops=6)
        kernels.schur_solve_operator(w, self._buf, self._plan_a)  # u*
        self.u, self._buf = self._buf, self.u
        self._inject(self.u, self.time + 0.5 * self.dt)
        kernels.schur_solve_operator(self.u, self._buf, self._plan_b)
        self.u, self._buf = self._buf, self.u
        self.step_index += 1

    def output(self) -> FieldSet:
        return self.u.copy()

    @property
    def persistent_field_arrays(self) -> int:
        return 2


class DouglasGunn(Stepper):
    """Delta-formulation stepper. Runs the reduced alternating-direction
    engine and exposes the stage increments

        delta_star = fields^{n+1/2} - fields^n
        delta      = (fields^{n+1} - fields^n) / 2

    so that output = previous output + delta."""

    scheme = SchemeId.DOUGLAS_GUNN
    formulation = Formulation.FUNDAMENTAL

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None):
        super().__init__(grid, medium, dt, source)
        self._engine = AdiFundamental(
            grid, medium, dt, initial, source=source, track_h=True
        )
        self._prev = FieldSet.zeros(grid, scaling=DOUBLED)
        self._half = FieldSet.zeros(grid, scaling=DOUBLED)
        self.delta_star: FieldSet | None = None
        self.delta: FieldSet | None = None

    def step(self) -> None:
        engine = self._engine
        if engine._h_pending:
            kernels.pr_resolve_pending_aux(engine.fields, engine.aux)
            engine._h_pending = False
        self._prev.copy_from(engine.fields)
        engine.step(emit_h=True, capture_half=self._half)
        self.delta_star = FieldSet(
            *(h - p for h, p in zip(self._half.arrays(), self._prev.arrays())),
            scaling=PHYSICAL,
        )
        self.delta = FieldSet(
            *(
                0.5 * (f - p)
                for f, p in zip(engine.fields.arrays(), self._prev.arrays())
            ),
            scaling=PHYSICAL,
        )
        self.step_index = engine.step_index

    def previous_output(self) -> FieldSet:
        return self._prev.scaled(0.5, PHYSICAL)

    def output(self) -> FieldSet:
        return self._engine.output()

    @property
    def persistent_field_arrays(self) -> int:
        return 4  # engine pair plus the two recorded stage buffers


# ---------------------------------------------------------------------------
# locally one-dimensional and split-step schemes


class _LodFundamental(Stepper):
    """Reduced sequential-procedure engine: each procedure solves
    (I/2 - (tau/2) OP) v = u then replaces u <- v - u."""

    #: (operator, tau numerator of dt) per procedure
    _procedure_spec: tupleations = ()

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None,
                 track_aux_h: bool = False):
        super().__init__(grid, medium, dt, source)
        self._plans = tuple(
            kernels.make_plan(op, frac * self.dt, grid, medium, 0.5, self._fac_cache)
            for op, frac in self._procedure_spec
        )
        self._times = self._procedure_times()
        self.track_aux_h = track_aux_h
        self.u = initial.copy()
        self.aux = AuxFieldSet.zeros(grid)

    def _procedure_times(self) -> tuple[float, ...]:
        offsets = []
        t = 0.0
        for _, frac in self._procedure_spec:
            offsets.append(t)
            t += frac
        return tuple(offsets)

    def step(self) -> None:
        for plan, offset in zip(self._plans, self._times):
            self._inject(self.u, self.time + offset * self.dt)
            kernels.fundamental_substep(
                self.u, self.aux, plan, combined=not self.track_aux_h
            )
        self.step_index += 1

    def output(self) -> FieldSet:
        return self.u.copy()

    def aux_fields(self) -> FieldSet:
        """Auxiliary solution of the last procedure as a field set (its H
        part is only tracked when ``track_aux_h`` is set)."""
        return FieldSet(*(a.copy() for a in self.aux.arrays()), scaling=PHYSICAL)

    @property
    def persistent_field_arrays(self) -> int:
        return 2


class Lod1Fundamental(_LodFundamental):
    scheme = SchemeId.LOD1
    formulation = Formulation.FUNDAMENTAL
    _procedure_spec = ((SPLIT_A, 0.5), (SPLIT_B, 0.5))


class Ss2Fundamental(_LodFundamental):
    """Symmetric split-step: quarter-step first operator, half-step
    second, quarter-step first."""

    scheme = SchemeId.SS2
    formulation = Formulation.FUNDAMENTAL
    _procedure_spec = ((SPLIT_A, 0.25), (SPLIT_B, 0.5), (SPLIT_A, 0.25))


class Lod2Fundamental(_LodFundamental):
    """Quarter-offset variant: construction applies the input pass taking
    integer-step fields to the quarter-offset main iteration; ``output``
    applies the inverse pass, independently of the iteration state."""

    scheme = SchemeId.LOD2
    formulation = Formulation.FUNDAMENTAL
    _procedure_spec = ((SPLIT_A, 0.5), (SPLIT_B, 0.5))
    phase_offset = 0.25

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None,
                 track_aux_h: bool = False):
        super().__init__(grid, medium, dt, initial, source, track_aux_h)
        self._input_plan = kernels.make_plan(
            SPLIT_B, 0.25 * self.dt, grid, medium, 0.5, self._fac_cache
        )
        self._output_plan = kernels.make_plan(
            SPLIT_B, -0.25 * self.dt, grid, medium, 0.5, self._fac_cache
        )
        kernels.fundamental_substep(self.u, self.aux, self._input_plan)

    def _procedure_times(self) -> tuple[float, ...]:
        return (0.25, 0.75)

    def output(self) -> FieldSet:
        out = self.u.copy()
        scratch = AuxFieldSet.zeros(self.grid)
        kernels.fundamental_substep(out, scratch, self._output_plan)
        return out


class _LodOriginal(Stepper):
    """Textbook sequential-procedure engine, two field buffers."""

    _procedure_spec = ()

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None):
        super().__init__(grid, medium, dt, source)
        self._plans = tuple(
            kernels.make_plan(op, frac * self.dt, grid, medium, 1.0, self._fac_cache)
            for op, frac in self._procedure_spec
        )
        offsets = []
        t = 0.0
        for _, frac in self._procedure_spec:
            offsets.append(t)
            t += frac
        self._times = tuple(offsets)
        self.u = initial.copy()
        self._buf = FieldSet.zeros(grid)

    def step(self) -> None:
        for plan, offset in zip(self._plans, self._times):
            self._inject(self.u, self.time + offset * self.dt)
            kernels.lod_original_substep(self.u, self._buf, plan)
            self.u, self._buf = self._buf, self.u
        self.step_index += 1

    def output(self) -> FieldSet:
        return self.u.copy()

    @property
    def persistent_field_arrays(self) -> int:
        return 2


class Lod1Original(_LodOriginal):
    scheme = SchemeId.LOD1
    formulation = Formulation.ORIGINAL
    _procedure_spec = ((SPLIT_A, 0.5), (SPLIT_B, 0.5))


class Ss2Original(_LodOriginal):
    scheme = SchemeId.SS2
    formulation = Formulation.ORIGINAL
    _procedure_spec = ((SPLIT_A, 0.25), (SPLIT_B, 0.5), (SPLIT_A, 0.25))


class Lod2Original(_LodOriginal):
    scheme = SchemeId.LOD2
    formulation = Formulation.ORIGINAL
    _procedure_spec = ((SPLIT_A, 0.5), (SPLIT_B, 0.5))
    phase_offset = 0.25

    def __init__(self, grid, medium, dt, initial: FieldSet, source=None):
        super().__init__(grid, medium, dt, initial, source)
        self._times = (0.25, 0.75)
        self._input_plan = kernels.make_plan(
            SPLIT_B, 0.25 * self.dt, grid, medium, 1.0, self._fac_cache
        )
        self._output_plan = kernels.make_plan(
            SPLIT_B, -0.25 * self.dt, grid, medium, 1.0, self._fac_cache
        )
        kernels.lod_original_substep(self.u, self._buf, self._input_plan)
        self.u, self._buf = self._buf, self.u

    def output(self) -> FieldSet:
        out = FieldSet.zeros(self.grid)
        kernels.lod_original_substep(self.u, out, self._output_plan)
        return out


# ---------------------------------------------------------------------------
# dense reference scheme


class CrankNicolsonReference(Stepper):
    """Unsplit implicit reference, solved by direct factorization of the
    assembled full-curl matrix. Limited to small grids."""

    scheme = SchemeId.CRANK_NICOLSON_REF

    def __init__(self, grid, medium, dt, initial: FieldSet,
                 formulation: Formulation = Formulation.FUNDAMENTAL, source=None):
        super().__init__(grid, medium, dt, source)
        if grid.num_unknowns > MAX_DIRECT_UNKNOWNS:
            raise CapabilityError(
                f"grid has {grid.num_unknowns} unknowns; the dense reference "
                f"scheme is capped at {MAX_DIRECT_UNKNOWNS}"
            )
        self.formulation = Formulation(formulation)
        curl = curl_matrix_sparse(grid, medium)
        n = curl.shape[0]
        eye = sp.identity(n, format="csr")
        tau = self.dt / 2.0
        if self.formulation == Formulation.ORIGINAL:
            self._lu = spla.splu((eye - tau * curl).tocsc())
            self._rhs_mat = (eye + tau * curl).tocsr()
        else:
            self._lu = spla.splu((0.5 * eye - 0.5 * tau * curl).tocsc())
            self._rhs_mat = None
        self.u = initial.copy()

    def step(self) -> None:
        self._inject(self.u, self.time)
        vec = self.u.as_vector()
        if self.formulation == Formulation.ORIGINAL:
            new = self._lu.solve(self._rhs_mat @ vec)
        else:
            half = self._lu.solve(vec)
            new = half - vec
        self.u.fill_from_vector(new)
        self.step_index += 1

    def output(self) -> FieldSet:
        return self.u.copy()

    @property
    def persistent_field_arrays(self) -> int:
        return 1


def crank_nicolson_reference_step(
    u: FieldSet,
    formulation: Formulation,
    grid: YeeGrid,
    medium: Medium,
    dt: float,
) -> FieldSet:
    """Single unsplit implicit step of the given formulation."""
    stepper = CrankNicolsonReference(grid, medium, dt, u, formulation)
    stepper.step()
    return stepper.output()


# ---------------------------------------------------------------------------
# cross-scheme conversion


def lod_to_adi_convert(v: FieldSet, grid: YeeGrid, medium: Medium, dt: float) -> FieldSet:
    """Initial fields that make the sequential reduced iteration track the
    alternating-direction solution: treat ``v`` as the target field
    values and start the iteration from (I/2 + (dt/4) B) v."""
    coeffs = Coefficients.from_physics(dt, medium)
    out = v.scaled(0.5, PHYSICAL)
    add_scaled_split(out, v, SPLIT_B, dt / 4.0, coeffs, grid)
    return out


# ---------------------------------------------------------------------------
# factory

_CLASSES = {
    (SchemeId.ADI, Formulation.ORIGINAL): AdiOriginal,
    (SchemeId.ADI, Formulation.FUNDAMENTAL): AdiFundamental,
    (SchemeId.LOD1, Formulation.ORIGINAL): Lod1Original,
    (SchemeId.LOD1, Formulation.FUNDAMENTAL): Lod1Fundamental,
    (SchemeId.SS2, Formulation.ORIGINAL): Ss2Original,
    (SchemeId.SS2, Formulation.FUNDAMENTAL): Ss2Fundamental,
    (SchemeId.LOD2, Formulation.ORIGINAL): Lod2Original,
    (SchemeId.LOD2, Formulation.FUNDAMENTAL): Lod2Fundamental,
    (SchemeId.DYAKONOV, Formulation.ORIGINAL): DyakonovOriginal,
    (SchemeId.DYAKONOV, Formulation.FUNDAMENTAL): DyakonovFundamental,
    (SchemeId.DOUGLAS_GUNN, Formulation.FUNDAMENTAL): DouglasGunn,
}


def available_pairs() -> tuple[tuple[SchemeId, Formulation], ...]:
    pairs = list(_CLASSES)
    pairs.append((SchemeId.CRANK_NICOLSON_REF, Formulation.ORIGINAL))
    pairs.append((SchemeId.CRANK_NICOLSON_REF, Formulation.FUNDAMENTAL))
    return tuple(pairs)


def make_stepper(
    scheme: SchemeId,
    formulation: Formulation,
    grid: YeeGrid,
    medium: Medium | None = None,
    dt: float | None = None,
    initial: FieldSet | None = None,
    source=None,
    **kwargs,
) -> Stepper:
    """Construct an initialized stepper for the scheme/formulation pair."""
    scheme = SchemeId(scheme)
    formulation = Formulation(formulation)
    medium = medium if medium is not None else Medium(1.0, 1.0)
    if dt is None:
        raise ValueError("dt is required")
    if initial is None:
        initial = FieldSet.zeros(grid)
    if scheme == SchemeId.CRANK_NICOLSON_REF:
        return CrankNicolsonReference(
            grid, medium, dt, initial, formulation=formulation, source=source
        )
    try:
        cls = _CLASSES[(scheme, formulation)]
    except KeyError:
        raise CapabilityError(
            f"scheme {scheme.value} has no {formulation.value} formulation"
        ) from None
    return cls(grid, medium, dt, initial, source=source, **kwargs)
