"""Soft source terms injected into designated E components.

A source adds a time-dependent value to one stored E sample immediately
before each procedure assembles its implicit right-hand side. Schemes
that march doubled working fields scale the addition by two so the
physical output sees the configured amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .grid import E_COMPONENTS, YeeGrid


def sinusoid(amplitude: float, frequency: float, phase: float = 0.0) -> Callable[[float], float]:
    """amplitude * sin(2 pi frequency t + phase)"""
    two_pi_f = 2.0 * math.pi * frequency

    def waveform(t: float) -> float:
        return amplitude * math.sin(two_pi_f * t + phase)

    return waveform


def gaussian_pulse(amplitude: float, t0: float, tau: float) -> Callable[[float], float]:
    """amplitude * exp(-((t - t0)/tau)^2)"""

    def waveform(t: float) -> float:
        arg = (t - t0) / tau
        return amplitude * math.exp(-arg * arg)

    return waveform


@dataclass(frozen=True)
class SourceTerm:
    """One additive excitation: E component, stored-array cell index, and
    time waveform."""

    component: str
    index: tuple[int, int, int]
    waveform: Callable[[float], float]

    def validate(self, grid: YeeGrid) -> None:
        if self.component not in E_COMPONENTS:
            raise ValueError(
                f"source component must be one of {E_COMPONENTS}, got {self.component!r}"
            )
        shape = grid.component_shape(self.component)
        for i, (idx, n) in enumerate(zip(self.index, shape)):
            if not (0 <= idx < n):
                raise ValueError(
                    f"source index {self.index} outside {self.component} extent {shape}"
                )


def inject(fields, terms, t: float, factor: float = 1.0) -> None:
    """Add each term's waveform value at time ``t`` to its E sample."""
    for term in terms:
        fields.get(term.component)[term.index] += factor * term.waveform(t)
