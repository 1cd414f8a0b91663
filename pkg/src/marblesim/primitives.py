"""Marble tokens and the primitive trackside devices.

A bit is the presence or absence of a marble on a channel at a given phase.
Masses are exact rationals in units of one reference marble; merging adds
masses and the scalpel halves them, so every mass is p/q with q a power of
two.

The junction is the one interacting device.  Its two inputs A (left) and B
(right) cross, and its five output channels O1..O5 are numbered left to
right:

    (absent, absent)          nothing
    (absent, present)         B's marble leaves on O1
    (present, absent)         A's marble leaves on O5
    (present, present) bounce A's marble on O2, B's marble on O4
    (present, present) merge  one combined marble on O3

All other devices are passive or single-input: the scalpel halves a marble
onto two channels, the sensor+syringe emits a fresh marble exactly when its
input stays empty, the tap forwards its input and injects a copy, joins
funnel several channels into one, and holds park a marble for a set number
of phases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .physics import CollisionMode

__all__ = [
    "IN_PORTS",
    "JOIN_PORT_PATTERN",
    "Marble",
    "MarbleFactory",
    "NodeKind",
    "OUT_PORTS",
    "PortOccupancy",
    "junction_route",
    "scalpel_split",
    "sensor_syringe_fire",
    "tap_copy",
]


class NodeKind(enum.Enum):
    INPUT = "input"
    CONST = "const1"
    HOLD = "hold"
    JUNCTION = "junction"
    SCALPEL = "scalpel"
    SYRINGE = "sensor_syringe"
    TAP = "tap"
    JOIN = "join"
    OUTPUT = "output"
    WASTE = "waste"


# Fixed port names per kind. Join input ports are in1..inN (N >= 2) and are
# validated against JOIN_PORT_PATTERN instead; waste accepts any number of
# channels on its single "in".
IN_PORTS: dict[NodeKind, tuple[str, ...]] = {
    NodeKind.INPUT: (),
    NodeKind.CONST: (),
    NodeKind.HOLD: ("in",),
    NodeKind.JUNCTION: ("A", "B"),
    NodeKind.SCALPEL: ("in",),
    NodeKind.SYRINGE: ("in",),
    NodeKind.TAP: ("in",),
    NodeKind.JOIN: (),
    NodeKind.OUTPUT: ("in",),
    NodeKind.WASTE: ("in",),
}

OUT_PORTS: dict[NodeKind, tuple[str, ...]] = {
    NodeKind.INPUT: ("out",),
    NodeKind.CONST: ("out",),
    NodeKind.HOLD: ("out",),
    NodeKind.JUNCTION: ("O1", "O2", "O3", "O4", "O5"),
    NodeKind.SCALPEL: ("out1", "out2"),
    NodeKind.SYRINGE: ("out",),
    NodeKind.TAP: ("out", "copy"),
    NodeKind.JOIN: ("out",),
    NodeKind.OUTPUT: (),
    NodeKind.WASTE: (),
}

JOIN_PORT_PATTERN = r"in[1-9][0-9]*"


@dataclass(frozen=True)
class Marble:
    """One marble: a run-unique id, an exact mass, and where it came from."""

    ident: int
    mass: Fraction
    origin: str

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ValueError(f"marble mass must be positive, got {self.mass}")


class MarbleFactory:
    """Allocates run-unique marble ids in creation order."""

    def __init__(self) -> None:
        self._next = 1

    def fresh(self, mass: Fraction, origin: str) -> Marble:
        marble = Marble(self._next, Fraction(mass), origin)
        self._next += 1
        return marble


@dataclass(frozen=True)
class PortOccupancy:
    """Masses present on the five junction outputs after one firing."""

    o1: Fraction | None = None
    o2: Fraction | None = None
    o3: Fraction | None = None
    o4: Fraction | None = None
    o5: Fraction | None = None

    def occupied(self) -> tuple[tuple[str, Fraction], ...]:
        pairs = (("O1", self.o1), ("O2", self.o2), ("O3", self.o3),
                 ("O4", self.o4), ("O5", self.o5))
        return tuple((port, mass) for port, mass in pairs if mass is not None)

    def total_mass(self) -> Fraction:
        return sum((mass for _, mass in self.occupied()), Fraction(0))


def junction_route(a_present: bool, b_present: bool, mode: CollisionMode,
                   a_mass: Fraction = Fraction(1),
                   b_mass: Fraction = Fraction(1)) -> PortOccupancy:
    """Route one junction firing.

    Lone marbles cross (A alone exits rightmost on O5, B alone leftmost on
    O1).  A collision either bounces (left marble to O2, right to O4, masses
    kept) or merges into a single marble on O3 with the summed mass.  Total
    mass out always equals total mass in.
    """
    if a_present and a_mass <= 0:
        raise ValueError(f"present A marble needs positive mass, got {a_mass}")
    if b_present and b_mass <= 0:
        raise ValueError(f"present B marble needs positive mass, got {b_mass}")
    if not a_present and not b_present:
        return PortOccupancy()
    if a_present and not b_present:
        return PortOccupancy(o5=Fraction(a_mass))
    if b_present and not a_present:
        return PortOccupancy(o1=Fraction(b_mass))
    if mode is CollisionMode.BOUNCE:
        return PortOccupancy(o2=Fraction(a_mass), o4=Fraction(b_mass))
    return PortOccupancy(o3=Fraction(a_mass) + Fraction(b_mass))


def scalpel_split(marble: Marble, factory: MarbleFactory,
                  origin: str) -> tuple[Marble, Marble]:
    """Cut a marble into two halves with fresh ids.

    The input marble is consumed; each half carries exactly half its mass,
    so the sum is conserved and denominators stay powers of two.
    """
    half = marble.mass / 2
    return factory.fresh(half, origin), factory.fresh(half, origin)


def sensor_syringe_fire(input_present: bool) -> bool:
    """True exactly when a fresh marble must be injected (input absent)."""
    return not input_present


def tap_copy(input_present: bool) -> tuple[bool, bool]:
    """(forward original, inject copy): both happen iff the input is present."""
    return input_present, input_present
