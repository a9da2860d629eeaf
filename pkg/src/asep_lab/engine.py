"""Harris-construction engine: bond clocks, single and basic-coupled runs.

Only bonds inside the active region can change a configuration, so the
superposition of their clocks is sampled directly: total rate equals the
number of active bonds (each bond carries ``p + q = 1``).  One event costs
one exponential draw, one uniform for the bond and, when ``q > 0``, one
uniform for the direction.  :mod:`asep_lab.fast` consumes the same draws in
the same order, so both paths give identical trajectories for one seed.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import Configuration, active_bounds, exchange, priority


@dataclass(frozen=True)
class EngineParams:
    p: float = 1.0

    def __post_init__(self):
        if not (0.5 < self.p <= 1.0):
            raise ValueError(f"p must lie in (1/2, 1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


class Direction(enum.Enum):
    RIGHT = "R"
    LEFT = "L"


class Effect(enum.Enum):
    SWAPPED = "S"
    BLOCKED = "B"


@dataclass(frozen=True)
class BondEvent:
    time: float
    source: int
    direction: Direction

    @property
    def target(self) -> int:
        return self.source + 1 if self.direction is Direction.RIGHT else self.source - 1

    @property
    def bond(self) -> tuple[int, int]:
        return (min(self.source, self.target), max(self.source, self.target))


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Stream for replica ``replica``: Philox keyed by ``(seed, replica)``."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, replica], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def next_event(bounds: tuple[int, int], clock: float, rng: np.random.Generator,
               p: float = 1.0) -> BondEvent:
    l, r = bounds
    if r <= l:
        raise ValueError("empty bond range")
    n = r - l
    t = clock + rng.standard_exponential() / n
    return _place_event(t, l, n, rng, p)


def _place_event(t: float, l: int, n: int, rng: np.random.Generator, p: float) -> BondEvent:
    x = l + int(rng.random() * n)
    if p < 1.0 and rng.random() >= p:
        return BondEvent(t, x + 1, Direction.LEFT)
    return BondEvent(t, x, Direction.RIGHT)


def apply_event(c: Configuration, e: BondEvent) -> tuple[Configuration, Effect]:
    src, tgt = e.source, e.target
    if priority(c[src], c[tgt]):
        return exchange(c, src, tgt), Effect.SWAPPED
    return c, Effect.BLOCKED


Observer = Callable[["BondEvent", Sequence[Configuration], Sequence[Configuration],
                     Sequence[Effect]], object]


@dataclass
class CoupledEnsemble:
    """Marginals driven by one event stream.

    ``pending`` holds an already drawn next-epoch time, so stopping at a
    horizon and resuming never alters the realized clocks.
    """

    marginals: list[Configuration]
    rng: np.random.Generator
    p: float = 1.0
    clock: float = 0.0
    pending: float | None = None
    events: int = 0

    def __post_init__(self):
        EngineParams(self.p)
        if not self.marginals:
            raise ValueError("ensemble needs at least one marginal")

    def union_bounds(self) -> tuple[int, int]:
        bs = [active_bounds(c) for c in self.marginals]
        return min(b[0] for b in bs), max(b[1] for b in bs)


def run_coupled(ensemble: CoupledEnsemble, horizon: float,
                observers: Iterable[Observer] = (), pad: int = 0,
                trace: "EventTrace | None" = None) -> CoupledEnsemble:
    """Advance all marginals on shared clocks until ``horizon`` or an observer
    returns a truthy value.

    ``pad`` widens the sampled bond range on both sides; pad events are
    blocked everywhere and exist only to check that restriction is sound.
    """
    if horizon < ensemble.clock:
        raise ValueError("horizon lies before the current clock")
    observers = list(observers)
    marginals = list(ensemble.marginals)
    rng, p = ensemble.rng, ensemble.p
    clock, pending, count = ensemble.clock, ensemble.pending, ensemble.events
    while True:
        bs = [active_bounds(c) for c in marginals]
        l = min(b[0] for b in bs) - pad
        r = max(b[1] for b in bs) + pad
        n = r - l
        if pending is None:
            pending = clock + rng.standard_exponential() / n
        if pending > horizon:
            break
        e = _place_event(pending, l, n, rng, p)
        clock, pending = pending, None
        count += 1
        lo, hi = e.bond
        before = [c.grown(lo - 1, hi + 1) for c in marginals]
        after, effects = [], []
        for c in before:
            c2, eff = apply_event(c, e)
            after.append(c2)
            effects.append(eff)
        marginals = after
        if trace is not None:
            trace.append(e, effects)
        stop = False
        for obs in observers:
            if obs(e, before, after, effects):
                stop = True
        if stop:
            break
    return replace(ensemble, marginals=marginals, clock=clock, pending=pending, events=count)


def run_single(c: Configuration, horizon: float, rng: np.random.Generator, p: float = 1.0,
               observers: Iterable[Observer] = ()) -> Configuration:
    ens = run_coupled(CoupledEnsemble([c], rng, p), horizon, observers)
    return ens.marginals[0]


@dataclass
class EventTrace:
    """Line-delimited event log: ``time source direction effects``."""

    times: list[float] = field(default_factory=list)
    sources: list[int] = field(default_factory=list)
    directions: list[Direction] = field(default_factory=list)
    effects: list[str] = field(default_factory=list)

    def append(self, e: BondEvent, effects: Sequence[Effect] = ()):
        self.times.append(e.time)
        self.sources.append(e.source)
        self.directions.append(e.direction)
        self.effects.append("".join(x.value for x in effects))

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        for t, s, d in zip(self.times, self.sources, self.directions):
            yield BondEvent(t, s, d)

    def dumps(self) -> str:
        buf = io.StringIO()
        for t, s, d, eff in zip(self.times, self.sources, self.directions, self.effects):
            buf.write(f"{t!r}\t{s}\t{d.value}\t{eff or '-'}\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "EventTrace":
        tr = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            t, s, d, eff = line.split("\t")
            tr.times.append(float(t))
            tr.sources.append(int(s))
            tr.directions.append(Direction(d))
            tr.effects.append("" if eff == "-" else eff)
        return tr


def replay(c: Configuration, events: Iterable[BondEvent],
           observers: Iterable[Observer] = ()) -> Configuration:
    """Apply a recorded event stream to ``c``; events out of the window are no-ops."""
    observers = list(observers)
    for e in events:
        lo, hi = e.bond
        before = c.grown(lo - 1, hi + 1)
        c, eff = apply_event(before, e)
        for obs in observers:
            obs(e, [before], [c], [eff])
    return c
