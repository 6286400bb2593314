"""Yee-grid geometry, media, time-step bookkeeping, and field storage.

Staggering follows the standard Yee cell: Ex sits at (i+1/2, j, k), Ey at
(i, j+1/2, k), Ez at (i, j, k+1/2); Hx at (i, j+1/2, k+1/2), Hy at
(i+1/2, j, k+1/2), Hz at (i+1/2, j+1/2, k). The enclosing box is a perfect
electric conductor: tangential E on the outer boundary is identically zero
and is not stored, which keeps every implicit line system strictly
tridiagonal with Dirichlet ends. H components normal to a wall lie in the
wall plane; they are stored but never driven, because the only E values
that could move them are pinned boundary tangentials.

Stored array shapes for an (nx, ny, nz)-cell grid:

    ex: (nx,   ny-1, nz-1)      hx: (nx+1, ny,   nz  )
    ey: (nx-1, ny,   nz-1)      hy: (nx,   ny+1, nz  )
    ez: (nx-1, ny-1, nz  )      hz: (nx,   ny,   nz+1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

E_COMPONENTS = ("ex", "ey", "ez")
H_COMPONENTS = ("hx", "hy", "hz")
COMPONENTS = E_COMPONENTS + H_COMPONENTS

AXIS_NAMES = ("x", "y", "z")

#: own (staggered-half) axis of each H component
H_OWN_AXIS = {"hx": 0, "hy": 1, "hz": 2}

PHYSICAL = "physical"
DOUBLED = "doubled"


@dataclass(frozen=True)
class YeeGrid:
    """Uniform rectangular grid of Yee cells.

    nx, ny, nz count cells; dx, dy, dz are the spatial steps in meters.
    At least 3 cells per direction are required so that every implicit
    line system has interior unknowns.
    """

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 3:
                raise ValueError(f"{name} must be an integer >= 3, got {n!r}")
        for name in ("dx", "dy", "dz"):
            d = getattr(self, name)
            if not (d > 0) or not math.isfinite(d):
                raise ValueError(f"{name} must be a positive finite real, got {d!r}")

    @classmethod
    def cube(cls, n: int, delta: float = 1.0) -> "YeeGrid":
        return cls(n, n, n, delta, delta, delta)

    @property
    def cells(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def steps(self) -> tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    def n(self, axis: int) -> int:
        return self.cells[axis]

    def step(self, axis: int) -> float:
        return self.steps[axis]

    def component_shape(self, name: str) -> tuple[int, int, int]:
        nx, ny, nz = self.cells
        shapes = {
            "ex": (nx, ny - 1, nz - 1),
            "ey": (nx - 1, ny, nz - 1),
            "ez": (nx - 1, ny - 1, nz),
            "hx": (nx + 1, ny, nz),
            "hy": (nx, ny + 1, nz),
            "hz": (nx, ny, nz + 1),
        }
        try:
            return shapes[name]
        except KeyError:
            raise ValueError(f"unknown field component {name!r}") from None

    @property
    def num_unknowns(self) -> int:
        return sum(int(np.prod(self.component_shape(c))) for c in COMPONENTS)


@dataclass(frozen=True)
class Medium:
    """Uniform lossless isotropic medium."""

    epsilon: float
    mu: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive, got {self.mu!r}")

    @classmethod
    def vacuum(cls) -> "Medium":
        return cls(epsilon=8.8541878128e-12, mu=1.25663706212e-6)

    @property
    def wave_speed(self) -> float:
        return 1.0 / math.sqrt(self.epsilon * self.mu)


def cfl_limit(grid: YeeGrid, medium: Medium) -> float:
    """Largest explicit-Yee-stable time step for this grid and medium."""
    s = math.sqrt(1.0 / grid.dx**2 + 1.0 / grid.dy**2 + 1.0 / grid.dz**2)
    return 1.0 / (medium.wave_speed * s)


@dataclass(frozen=True)
class TimeConfig:
    """Time step with its Courant ratio (informational; the implicit
    schemes have no step-size restriction)."""

    dt: float
    cfl_number: float

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    @classmethod
    def from_dt(cls, grid: YeeGrid, medium: Medium, dt: float) -> "TimeConfig":
        return cls(dt=dt, cfl_number=dt / cfl_limit(grid, medium))

    @classmethod
    def from_cfl(cls, grid: YeeGrid, medium: Medium, cfl_number: float) -> "TimeConfig":
        if not (cfl_number > 0):
            raise ValueError(f"cfl_number must be positive, got {cfl_number!r}")
        return cls(dt=cfl_number * cfl_limit(grid, medium), cfl_number=cfl_number)


@dataclass(frozen=True)
class Coefficients:
    """Half-step update coefficients b = dt/(2 eps), d = dt/(2 mu).

    These are the constants multiplying the electric and magnetic curl
    terms in every half-step operator; the medium and dt are kept so the
    raw 1/eps, 1/mu actions stay derivable.
    """

    b: float
    d: float
    dt: float
    epsilon: float
    mu: float

    def __post_init__(self):
        if not (self.b > 0 and self.d > 0):
            raise ValueError("coefficients b and d must be positive")

    @classmethod
    def from_physics(cls, dt: float, medium: Medium) -> "Coefficients":
        return cls(
            b=dt / (2.0 * medium.epsilon),
            d=dt / (2.0 * medium.mu),
            dt=dt,
            epsilon=medium.epsilon,
            mu=medium.mu,
        )

    @property
    def bd(self) -> float:
        return self.b * self.d


class _SixComponents:
    """Shared behavior for the six-array field containers."""

    __slots__ = ("ex", "ey", "ez", "hx", "hy", "hz")

    def __init__(self, ex, ey, ez, hx, hy, hz):
        self.ex, self.ey, self.ez = ex, ey, ez
        self.hx, self.hy, self.hz = hx, hy, hz

    def get(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def set(self, name: str, value: np.ndarray) -> None:
        setattr(self, name, value)

    def arrays(self):
        return tuple(getattr(self, c) for c in COMPONENTS)

    def items(self):
        return tuple((c, getattr(self, c)) for c in COMPONENTS)

    @classmethod
    def _alloc(cls, grid: YeeGrid, **extra):
        return cls(
            *(np.zeros(grid.component_shape(c)) for c in COMPONENTS), **extra
        )

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) if a.size else 0.0 for a in self.arrays())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def fill_from_vector(self, vec: np.ndarray) -> None:
        pos = 0
        for a in self.arrays():
            a.flat[:] = vec[pos : pos + a.size]
            pos += a.size
        if pos != vec.size:
            raise ValueError(f"vector length {vec.size} does not match field size {pos}")


class FieldSet(_SixComponents):
    """The six Yee field components.

    ``scaling`` records whether the set stores physical fields or the
    doubled working fields some of the reduced-form iterations march in;
    every output path normalizes back to physical.
    """

    __slots__ = ("scaling",)

    def __init__(self, ex, ey, ez, hx, hy, hz, scaling: str = PHYSICAL):
        super().__init__(ex, ey, ez, hx, hy, hz)
        if scaling not in (PHYSICAL, DOUBLED):
            raise ValueError(f"unknown scaling tag {scaling!r}")
        self.scaling = scaling

    @classmethod
    def zeros(cls, grid: YeeGrid, scaling: str = PHYSICAL) -> "FieldSet":
        return cls._alloc(grid, scaling=scaling)

    @classmethod
    def from_vector(cls, grid: YeeGrid, vec: np.ndarray, scaling: str = PHYSICAL) -> "FieldSet":
        fs = cls.zeros(grid, scaling=scaling)
        fs.fill_from_vector(np.asarray(vec, dtype=float))
        return fs

    def copy(self) -> "FieldSet":
        return FieldSet(*(a.copy() for a in self.arrays()), scaling=self.scaling)

    def scaled(self, factor: float, scaling: str) -> "FieldSet":
        return FieldSet(*(factor * a for a in self.arrays()), scaling=scaling)


class AuxFieldSet(_SixComponents):
    """Auxiliary variables with the same staggering as :class:`FieldSet`."""

    @classmethod
    def zeros(cls, grid: YeeGrid) -> "AuxFieldSet":
        return cls._alloc(grid)

    def copy(self) -> "AuxFieldSet":
        return AuxFieldSet(*(a.copy() for a in self.arrays()))


def energy(fields: FieldSet, grid: YeeGrid, medium: Medium) -> float:
    """Discrete field energy sum(eps |E|^2 + mu |H|^2) * cell volume.

    Requires physical scaling; doubled working fields must be normalized
    through the owning scheme's output path first.
    """
    if fields.scaling != PHYSICAL:
        raise ValueError("energy is defined on physically scaled fields")
    e2 = sum(float(np.sum(fields.get(c) ** 2)) for c in E_COMPONENTS)
    h2 = sum(float(np.sum(fields.get(c) ** 2)) for c in H_COMPONENTS)
    return (medium.epsilon * e2 + medium.mu * h2) * grid.cell_volume


def max_rel_difference(a: FieldSet, b: FieldSet, floor: float = 1e-300) -> float:
    """Largest |a - b| over all components, relative to the largest |a|, |b|."""
    num = 0.0
    den = floor
    for arr_a, arr_b in zip(a.arrays(), b.arrays()):
        num = max(num, float(np.max(np.abs(arr_a - arr_b))) if arr_a.size else 0.0)
        den = max(
            den,
            float(np.max(np.abs(arr_a))) if arr_a.size else 0.0,
            float(np.max(np.abs(arr_b))) if arr_b.size else 0.0,
        )
    return num / den
