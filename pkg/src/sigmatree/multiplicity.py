"""Multiplicities: positive integers extended by a countable-infinity symbol.

Edge-class multiplicities count star edges of one class at one vertex.
Downstairs trees are locally finite, so their multiplicities are plain
ints; upstairs trees may have infinite stars, represented by the OMEGA
singleton.  OMEGA absorbs products with positive integers and dominates
every finite value in comparisons.
"""

from __future__ import annotations

from typing import Union


class _Omega:
    """Countably infinite multiplicity. Use the OMEGA singleton."""

    __slots__ = ()

    def __repr__(self):
        return "OMEGA"

    def __str__(self):
        return "omega"

    # total order: OMEGA is strictly above every int and equal to itself
    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("sigmatree.OMEGA")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __mul__(self, other):
        if other is self:
            return self
        if isinstance(other, int):
            if other < 1:
                raise ValueError("multiplicity arithmetic is defined for n >= 1 only")
            return self
        return NotImplemented

    __rmul__ = __mul__

    def __reduce__(self):
        return (_omega_instance, ())


OMEGA = _Omega()

Mult = Union[int, _Omega]


def _omega_instance():
    return OMEGA


def is_omega(m: Mult) -> bool:
    return m is OMEGA


def parse_mult(value) -> Mult:
    """Read a multiplicity from its document form (positive int or "omega")."""
    if value == "omega":
        return OMEGA
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"multiplicity must be a positive integer or \"omega\", got {value!r}")
    if value < 1:
        raise ValueError(f"multiplicity must be >= 1, got {value}")
    return value


def mult_to_doc(m: Mult):
    """Document form of a multiplicity."""
    return "omega" if m is OMEGA else m


def capped(m: Mult, omega_cap: int) -> int:
    """Number of star edges to materialize: OMEGA truncates to omega_cap.

    Finite multiplicities are never truncated; concrete balls stay exact
    wherever the input is locally finite.
    """
    return omega_cap if m is OMEGA else m


def mult_sum(values) -> Mult:
    """Sum of multiplicities (OMEGA absorbs)."""
    total = 0
    for v in values:
        if v is OMEGA:
            return OMEGA
        total += v
    return total
