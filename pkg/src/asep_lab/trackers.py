"""Observables on trajectories: second-class positions, collisions, currents."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .engine import BondEvent, Effect
from .lattice import FIRST, SECOND, Configuration, priority


@dataclass
class SecondClassTrack:
    """Sorted positions of the second-class particles and the collision time."""

    positions: list[int]
    collision_time: float | None = None
    collided_pair: tuple[int, int] | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")

    @classmethod
    def of(cls, c: Configuration) -> "SecondClassTrack":
        return cls(c.sites_of(SECOND))

    @property
    def collided(self) -> bool:
        return self.collision_time is not None


def observe_collision(track: SecondClassTrack, e: BondEvent, c: Configuration) -> SecondClassTrack:
    """Update ``track`` for event ``e`` about to act on ``c`` (the pre-event state)."""
    src, tgt = e.source, e.target
    a, b = c[src], c[tgt]
    if a == SECOND and b == SECOND:
        if track.collision_time is None:
            track.collision_time = e.time
            track.collided_pair = (min(src, tgt), max(src, tgt))
        return track
    if priority(a, b) and (a == SECOND or b == SECOND):
        old, new = (src, tgt) if a == SECOND else (tgt, src)
        i = track.positions.index(old)
        track.positions[i] = new
    return track


class CollisionObserver:
    """Engine observer tracking marginal ``index``; requests a stop at the first
    collision when ``stop`` is set."""

    def __init__(self, initial: Configuration, index: int = 0, stop: bool = True):
        self.track = SecondClassTrack.of(initial)
        self.index = index
        self.stop = stop

    def __call__(self, e: BondEvent, before: Sequence[Configuration],
                 after: Sequence[Configuration], effects: Sequence[Effect]):
        was = self.track.collided
        observe_collision(self.track, e, before[self.index])
        return self.stop and self.track.collided and not was


def current_right_of(c: Configuration, r: float, t: float) -> float:
    """First-class count on sites ``> rt``, plus weight ``floor(rt)+1-rt`` for site ``floor(rt)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    s = r * t
    k = math.floor(s)
    total = float(sum(1 for x in range(max(k + 1, c.left), c.right + 1) if c[x] == FIRST))
    if k + 1 < c.left:
        total += c.left - (k + 1)
    if c[k] == FIRST:
        total += k + 1 - s
    return total


def _require_second(c: Configuration, x: int):
    if c[x] != SECOND:
        raise ValueError(f"site {x} does not hold a second-class particle")


def particles_right_of_tag(c: Configuration, tag_position: int) -> int:
    _require_second(c, tag_position)
    return sum(1 for x in range(tag_position + 1, c.right + 1) if c[x] == FIRST)


def instantaneous_current(c: Configuration, x: int, p: float) -> float:
    """Expected net first-class flux across bond ``(x, x+1)``."""
    a = 1 if c[x] == FIRST else 0
    b = 1 if c[x + 1] == FIRST else 0
    return p * a * (1 - b) - (1.0 - p) * b * (1 - a)


def neighbor_occupancy(c: Configuration, tag_position: int) -> tuple[int, int]:
    _require_second(c, tag_position)
    return int(c[tag_position - 1] == FIRST), int(c[tag_position + 1] == FIRST)


def discrepancies(a: Configuration, b: Configuration) -> list[tuple[int, int]]:
    """Sites where the first-class indicators of ``a`` and ``b`` differ, with
    sign ``eta_a - eta_b``."""
    lo = min(a.left, b.left)
    hi = max(a.right, b.right)
    out = []
    for x in range(lo, hi + 1):
        d = int(a[x] == FIRST) - int(b[x] == FIRST)
        if d:
            out.append((x, d))
    return out


@dataclass
class ReplicaRecord:
    """Per-replica result written as one JSON line."""

    replica: int
    horizon: float
    tau: float | None = None
    positions: list[int] = field(default_factory=list)
    observables: dict = field(default_factory=dict)

    @property
    def censored(self) -> bool:
        return self.tau is None

    def to_json(self) -> str:
        d = asdict(self)
        d["censored"] = self.censored
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ReplicaRecord":
        d = json.loads(line)
        d.pop("censored", None)
        return cls(**d)
