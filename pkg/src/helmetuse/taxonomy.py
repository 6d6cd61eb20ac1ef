"""Rider-position / helmet-use class scheme.

A motorcycle is classified by which seats are occupied and whether each
rider wears a helmet.  Positions are D (driver), P0 (passenger in front
of the driver) and P1..P3 (passengers behind the driver, near to far).
The canonical string label concatenates one ``<Pos>Helmet`` or
``<Pos>NoHelmet`` segment per present rider, in the fixed order
D, P0, P1, P2, P3 (e.g. ``DHelmetP1NoHelmet``).  These labels are the
interchange strings used by every file format and by the annotation UI.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable

from .errors import ParseError, ValidationError


class Position(enum.Enum):
    """Rider position on the motorcycle; declaration order is canonical."""

    D = "D"
    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"

    @property
    def order(self) -> int:
        return _POSITION_ORDER[self]

    def __lt__(self, other: "Position") -> bool:
        return self.order < other.order


_POSITION_ORDER = {p: i for i, p in enumerate(Position)}

MAX_RIDERS = len(Position)


@dataclass(frozen=True)
class RiderConfig:
    """Occupied positions and per-rider helmet status for one motorcycle.

    ``riders`` is stored in canonical position order regardless of the
    order passed to the constructor.  A driver is always required.
    """

    riders: tuple[tuple[Position, bool], ...]

    def __init__(self, riders: Iterable[tuple[Position, bool]]):
        riders = tuple(sorted(riders, key=lambda r: r[0].order))
        if not riders:
            raise ValidationError("a rider config must have at least one rider",
                                  rule="empty-config")
        positions = [p for p, _ in riders]
        if len(set(positions)) != len(positions):
            dupes = sorted({p.value for p in positions if positions.count(p) > 1})
            raise ValidationError(f"duplicate rider position(s): {', '.join(dupes)}",
                                  rule="duplicate-position")
        if Position.D not in set(positions):
            raise ValidationError("driver position D must be present",
                                  rule="missing-driver")
        object.__setattr__(self, "riders", riders)

    @property
    def rider_count(self) -> int:
        return len(self.riders)

    @property
    def helmeted_count(self) -> int:
        return sum(1 for _, helmet in self.riders if helmet)


@dataclass(frozen=True)
class HelmetClass:
    """A rider config together with its canonical label."""

    label: str
    config: RiderConfig

    @classmethod
    def from_config(cls, config: RiderConfig) -> "HelmetClass":
        return cls(encode(config), config)

    @classmethod
    def from_label(cls, label: str) -> "HelmetClass":
        return cls(label, decode(label))


def encode(config: RiderConfig) -> str:
    """Canonical label for a config; inverse of :func:`decode`."""
    return "".join(
        f"{pos.value}{'Helmet' if helmet else 'NoHelmet'}"
        for pos, helmet in config.riders
    )


def decode(label: str) -> RiderConfig:
    """Parse a canonical label, rejecting non-canonical ordering.

    Tokenization is longest-match, so ``Helmet`` never matches inside
    ``NoHelmet``.
    """
    if not label:
        raise ParseError("empty label; expected position token", offset=0)
    riders: list[tuple[Position, bool]] = []
    last_order = -1
    i = 0
    n = len(label)
    while i < n:
        pos = None
        # Two-character positions (P0..P3) before the single-character D.
        for cand in ("P0", "P1", "P2", "P3", "D"):
            if label.startswith(cand, i):
                pos = Position(cand)
                break
        if pos is None:
            raise ParseError(
                f"expected position token (one of D, P0, P1, P2, P3), got {label[i:i+2]!r}",
                offset=i)
        i += len(pos.value)
        if pos.order <= last_order:
            raise ParseError(
                f"position {pos.value} out of canonical D,P0,P1,P2,P3 order",
                offset=i - len(pos.value), rule="non-canonical-order")
        last_order = pos.order
        if label.startswith("NoHelmet", i):
            riders.append((pos, False))
            i += len("NoHelmet")
        elif label.startswith("Helmet", i):
            riders.append((pos, True))
            i += len("Helmet")
        else:
            raise ParseError(
                f"expected 'Helmet' or 'NoHelmet' after {pos.value}, got {label[i:i+8]!r}",
                offset=i)
    return RiderConfig(riders)


def is_valid_label(label: str) -> bool:
    try:
        decode(label)
    except ValidationError:
        return False
    return True


def rider_stats(config: RiderConfig) -> tuple[int, int]:
    """(total riders, helmeted riders) for a config."""
    return config.rider_count, config.helmeted_count


def enumerate_classes(max_riders: int) -> list[HelmetClass]:
    """All valid classes with at most ``max_riders`` riders.

    Ordered by rider count, then canonical label. The driver is always
    present; passengers are any subset of P0..P3.
    """
    if not 1 <= max_riders <= MAX_RIDERS:
        raise ValidationError(f"max_riders must be in [1, {MAX_RIDERS}], got {max_riders}",
                              rule="max-riders-range")
    passengers = [p for p in Position if p is not Position.D]
    out: list[HelmetClass] = []
    for count in range(1, max_riders + 1):
        bucket = []
        for occupied in itertools.combinations(passengers, count - 1):
            positions = (Position.D,) + occupied
            for helmets in itertools.product((True, False), repeat=count):
                config = RiderConfig(zip(positions, helmets))
                bucket.append(HelmetClass.from_config(config))
        bucket.sort(key=lambda c: c.label)
        out.extend(bucket)
    return out
