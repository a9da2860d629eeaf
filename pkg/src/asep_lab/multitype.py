"""Totally asymmetric multi-type system started from label ``i`` at site ``i``.

A label jumps right onto a neighbour with a larger label at rate 1.  Lumping
labels by a monotone map gives another multi-type system on the same clocks,
which is how the overtaking experiments are run cheaply: labels below ``0``
become first-class particles, labels above ``m`` become holes, and only the
labels ``0..m`` are kept distinct.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .engine import BondEvent, Direction, EventTrace, replica_rng
from .fast import ClassRun, simulate
from .harness import EstimateSummary, bernoulli_summary, run_replicas
from .lattice import HOLE, SECOND, Configuration


@dataclass(frozen=True)
class MultiTypeConfiguration:
    """Labels on sites ``left .. left+len(labels)-1``; outside, every label
    below the window sits to the left and every label above to the right."""

    left: int
    labels: tuple[int, ...]

    def label_at(self, x: int) -> int:
        return self.labels[x - self.left]

    def position_of(self, label: int) -> int:
        return self.left + self.labels.index(label)

    def inversions(self) -> set[tuple[int, int]]:
        """Pairs ``(i, j)`` with ``i < j`` and ``i`` to the right of ``j``."""
        out = set()
        ls = self.labels
        for a in range(len(ls)):
            for b in range(a + 1, len(ls)):
                if ls[a] > ls[b]:
                    out.add((ls[b], ls[a]))
        return out

    @classmethod
    def initial(cls, radius: int) -> "MultiTypeConfiguration":
        return cls(-radius, tuple(range(-radius, radius + 1)))


def apply_label_event(mc: MultiTypeConfiguration, e: BondEvent) -> MultiTypeConfiguration:
    """Reference rule: a right attempt swaps iff the left label is smaller."""
    if e.direction is not Direction.RIGHT:
        raise ValueError("the multi-type system is totally asymmetric")
    i = e.source - mc.left
    if i < 0 or i + 1 >= len(mc.labels):
        return mc
    a, b = mc.labels[i], mc.labels[i + 1]
    if a >= b:
        return mc
    ls = list(mc.labels)
    ls[i], ls[i + 1] = b, a
    return MultiTypeConfiguration(mc.left, tuple(ls))


@dataclass
class OvertakeRecord:
    i: int
    overtaken: set[int] = field(default_factory=set)
    first_overtake_times: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SpeedSample:
    i: int
    t: float
    value: float


@dataclass
class MultiTypeRun:
    final: MultiTypeConfiguration
    overtakes: list[OvertakeRecord]
    speeds: list[SpeedSample]
    trace: EventTrace | None = None

    def __iter__(self):
        return iter((self.final, self.overtakes, self.speeds))


def min_radius(horizon: float) -> int:
    """Smallest radius accepted by :func:`run_multitype` for ``horizon``."""
    return math.floor(horizon + 10.0 * math.sqrt(horizon)) + 1


@nb.njit(cache=True)
def _label_kernel(labels, horizon, rng, tr_t, tr_src, trace_on):
    nb_ = labels.shape[0] - 1
    t = 0.0
    k = 0
    while True:
        t += rng.standard_exponential() / nb_
        if t > horizon:
            break
        x = int(rng.random() * nb_)
        if trace_on:
            if k >= tr_t.shape[0]:
                return -1
            tr_t[k] = t
            tr_src[k] = x
        k += 1
        a = labels[x]
        b = labels[x + 1]
        if a < b:
            labels[x] = b
            labels[x + 1] = a
    return k


def run_multitype(window_radius: int, horizon: float, seed: int | None = None, *,
                  rng: np.random.Generator | None = None, band: int = 2,
                  record_times: bool = True) -> MultiTypeRun:
    """Simulate labels ``-R..R`` on the ``2R`` bonds of a frozen window up to
    ``horizon``, reporting labels ``-band..band``."""
    R = int(window_radius)
    if R <= horizon + 10.0 * math.sqrt(horizon):
        raise ValueError(f"radius {R} too small for horizon {horizon}; "
                         f"need > {horizon + 10 * math.sqrt(horizon):.1f}")
    if band > R:
        raise ValueError("band exceeds radius")
    if rng is None:
        rng = replica_rng(0 if seed is None else seed, 0)
    cap = int(2 * R * horizon + 20 * math.sqrt(2 * R * horizon + 1) + 64) if record_times else 1
    while True:
        state = rng.bit_generator.state
        labels = np.arange(-R, R + 1, dtype=np.int64)
        tr_t, tr_src = np.empty(cap), np.empty(cap, np.int64)
        n = _label_kernel(labels, float(horizon), rng, tr_t, tr_src, record_times)
        if n >= 0:
            break
        rng.bit_generator.state = state
        cap *= 2
    final = MultiTypeConfiguration(-R, tuple(int(v) for v in labels))
    trace = None
    records = [OvertakeRecord(i) for i in range(-band, band + 1)]
    by_label = {r.i: r for r in records}
    if record_times:
        trace = EventTrace()
        trace.times = tr_t[:n].tolist()
        trace.sources = (tr_src[:n] - R).tolist()
        trace.directions = [Direction.RIGHT] * n
        trace.effects = [""] * n
        cells = list(range(-R, R + 1))
        for t, j in zip(trace.times, tr_src[:n].tolist()):
            a, b = cells[j], cells[j + 1]
            if a < b:
                cells[j], cells[j + 1] = b, a
                rec = by_label.get(a)
                if rec is not None and b not in rec.first_overtake_times:
                    rec.first_overtake_times[b] = t
    where = {lab: final.left + k for k, lab in enumerate(final.labels)}
    for rec in records:
        rec.overtaken = {j for j in final.labels if j > rec.i and where[j] < where[rec.i]}
    speeds = [SpeedSample(i, float(horizon), where[i] / horizon) for i in range(-band, band + 1)]
    return MultiTypeRun(final, records, speeds, trace)


def _lumped_cells(m: int) -> np.ndarray:
    """Codes at sites ``-1..m+1``: first-class guard, label 0, labels 1..m, hole guard."""
    return np.arange(m + 3)


def overtake_time(m: int, horizon: float, rng: np.random.Generator) -> float | None:
    """First time label 0 is right of all labels ``1..m`` (``None`` if after ``horizon``)."""
    run = ClassRun(-1, _lumped_cells(m), m + 2, 1.0, rng, overtake=(1, m + 1, m),
                   margin=int(horizon) + 64)
    run.advance(horizon)
    return run.tau


def overtake_pattern(m: int) -> Configuration:
    """Two second-class particles ``m`` apart with holes between them."""
    return Configuration.from_states(0, [SECOND] + [HOLE] * (m - 1) + [SECOND])


def _overtake_replica(seed: int, k: int, m: int, horizon: float, route: str) -> float:
    rng = replica_rng(seed, k)
    if route == "direct":
        t = overtake_time(m, horizon, rng)
    else:
        t = simulate(overtake_pattern(m), 1.0, horizon, rng, stop_on_collision=True).tau
    return math.nan if t is None else t


def overtake_target(m: int) -> tuple[float, str]:
    return 2.0 / (m + 2), ("exact" if m <= 2 else "conjecture")


def estimate_overtake(m: int, horizon: float, n_reps: int, seed: int, *, route: str = "pattern",
                      threads: int | None = None, batch: np.ndarray | None = None) -> EstimateSummary:
    """P(label 0 passes all of ``1..m`` by ``horizon``).

    ``route="pattern"`` uses the collision time of the lumped two-type pattern;
    ``route="direct"`` follows label 0 in the multi-type system.  ``batch``
    supplies precomputed per-replica times (NaN for none).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if route not in ("pattern", "direct"):
        raise ValueError(f"unknown route {route!r}")
    if batch is None:
        batch = np.array(run_replicas(_overtake_replica, n_reps, seed, threads,
                                      m=m, horizon=horizon, route=route))
    times = np.asarray(batch, dtype=float)[:n_reps]
    hits = ~np.isnan(times)
    target, kind = overtake_target(m)
    return bernoulli_summary("overtake", {"m": m, "t_max": horizon, "n_reps": n_reps,
                                          "seed": seed, "route": route}, hits,
                             target=target, target_kind=kind, censoring=float(1 - hits.mean()))


def joint_positions(t: float, rng: np.random.Generator) -> tuple[int, int]:
    """Positions of labels 0 and 1 at time ``t``."""
    run = ClassRun(-1, _lumped_cells(1), 3, 1.0, rng, margin=int(t) + 64)
    run.advance(t)
    left, w = run.window()
    return left + int(np.flatnonzero(w == 1)[0]), left + int(np.flatnonzero(w == 2)[0])


def _joint_replica(seed: int, k: int, t: float) -> tuple[int, int]:
    return joint_positions(t, replica_rng(seed, k))


def joint_speed_target(r: float) -> float:
    return (1 - r) * (1 + r) / 4


def estimate_joint_speeds(r: float, t: float, n_reps: int, seed: int, *,
                          threads: int | None = None, batch=None) -> EstimateSummary:
    """P(X_0(t)/t < r < X_1(t)/t)."""
    if abs(r) > 1:
        raise ValueError("|r| must be at most 1")
    if batch is None:
        batch = run_replicas(_joint_replica, n_reps, seed, threads, t=t)
    xy = np.asarray(batch, dtype=float)[:n_reps]
    hits = (xy[:, 0] / t < r) & (xy[:, 1] / t > r)
    return bernoulli_summary("joint-speeds", {"r": r, "t": t, "n_reps": n_reps, "seed": seed},
                             hits, target=joint_speed_target(r), target_kind="limit-as-t-grows")
