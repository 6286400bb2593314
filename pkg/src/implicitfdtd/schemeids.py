"""Scheme and formulation identifiers."""

from __future__ import annotations

from enum import Enum


class SchemeId(str, Enum):
    """The implemented time-stepping schemes.

    The dense reference scheme factorizes nothing and is only usable on
    grids small enough for a direct solve.
    """

    ADI = "adi"
    LOD1 = "lod1"
    SS2 = "ss2"
    LOD2 = "lod2"
    DYAKONOV = "dyakonov"
    DOUGLAS_GUNN = "douglas-gunn"
    CRANK_NICOLSON_REF = "crank-nicolson-ref"


class Formulation(str, Enum):
    """Original splitting form versus the reduced form whose right-hand
    sides are plain vector sums with no operator applications."""

    ORIGINAL = "original"
    FUNDAMENTAL = "fundamental"


def parse_scheme(text: str) -> SchemeId:
    try:
        return SchemeId(text.strip().lower())
    except ValueError:
        valid = ", ".join(s.value for s in SchemeId)
        raise ValueError(f"unknown scheme {text!r} (choose from: {valid})") from None


def parse_formulation(text: str) -> Formulation:
    try:
        return Formulation(text.strip().lower())
    except ValueError:
        valid = ", ".join(f.value for f in Formulation)
        raise ValueError(f"unknown formulation {text!r} (choose from: {valid})") from None
